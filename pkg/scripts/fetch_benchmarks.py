"""Build the bundled benchmark CSVs under src/clustcv/data/.

The three datasets are public and are redistributed by several PyPI
packages; this script pulls them from those wheels so that it works
against a plain package index.  Original sources:

  congress voting   https://archive.ics.uci.edu/dataset/105/congressional+voting+records
                    (KEEL "housevotes" copy, complete cases only)
  breast cancer     https://archive.ics.uci.edu/dataset/15/breast+cancer+wisconsin+original
                    (R package MASS, dataset ``biopsy``)
  brain tumours     https://schlieplab.org/Static/Supplements/CompCancer/Affymetrix/pomeroy-2002-v2/
                    (de Souto et al. benchmark copy shipped in biclustlib)

Preprocessing:

  congress voting   drop legislators with any missing vote, yea=1 / nay=0
  breast cancer     drop the ID column and records with missing values
  brain tumours     samples as rows, natural log of expression levels

Usage::

    python scripts/fetch_benchmarks.py [--workdir DIR]
"""

import argparse
import csv
import io
import math
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "clustcv" / "data"

WHEELS = {
    "keel-ds": "keel_ds/data/balanced/raw/housevotes.dat",
    "rdatasets": "rdatasets/_data/MASS/biopsy.pkl.compress",
    "biclustlib": "biclustlib/datasets/data/cancer_benchmark/pomeroy-2002-v2_database.txt",
}


def download(name, workdir):
    target = workdir / name
    target.mkdir(parents=True, exist_ok=True)
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", str(target), name],
        check=True,
    )
    (wheel,) = target.glob("*.whl")
    return zipfile.ZipFile(wheel)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        w.writerows(rows)


def congress(workdir):
    raw = download("keel-ds", workdir).read(WHEELS["keel-ds"]).decode()
    values, labels = [], []
    for line in raw.splitlines():
        if not line.strip() or line.startswith("@"):
            continue
        *votes, party = [c.strip() for c in line.split(",")]
        if any(v not in ("y", "n") for v in votes):
            continue
        values.append([1 if v == "y" else 0 for v in votes])
        labels.append([party])
    header = [f"vote{j + 1}" for j in range(len(values[0]))]
    write_csv(OUT / "congress_voting.csv", header, values)
    write_csv(OUT / "congress_voting_labels.csv", ["party"], labels)
    return len(values)


def breast_cancer(workdir):
    import pandas as pd

    blob = download("rdatasets", workdir).read(WHEELS["rdatasets"])
    df = pd.read_pickle(io.BytesIO(blob), compression="xz")
    cols = [f"V{j}" for j in range(1, 10)]
    df = df.dropna(subset=cols)
    write_csv(OUT / "breast_cancer.csv", cols, df[cols].astype(int).values.tolist())
    write_csv(OUT / "breast_cancer_labels.csv", ["class"], [[c] for c in df["class"]])
    return len(df)


def brain_tumor(workdir):
    raw = download("biclustlib", workdir).read(WHEELS["biclustlib"]).decode()
    lines = [ln.split("\t") for ln in raw.splitlines() if ln.strip()]
    classes = lines[0][1:]
    genes = [ln[0].strip('"') for ln in lines[1:]]
    expr = [[float(v) for v in ln[1:]] for ln in lines[1:]]
    rows = [
        [f"{math.log(expr[g][s]):.10g}" for g in range(len(genes))]
        for s in range(len(classes))
    ]
    write_csv(OUT / "brain_tumor.csv", genes, rows)
    write_csv(OUT / "brain_tumor_labels.csv", ["type"], [[c] for c in classes])
    return len(rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workdir", type=Path, default=None)
    args = ap.parse_args()
    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        workdir = args.workdir or Path(tmp)
        print("congress_voting", congress(workdir))
        print("breast_cancer", breast_cancer(workdir))
        print("brain_tumor", brain_tumor(workdir))


if __name__ == "__main__":
    main()
