"""Bundled benchmark datasets.

The CSVs under ``data/`` are built by ``scripts/fetch_benchmarks.py``:

* ``congress_voting``: 232 legislators x 16 votes, yea=1 / nay=0, complete cases.
* ``breast_cancer``: 683 biopsies x 9 cytology scores, complete cases.
* ``brain_tumor``: 42 samples x 1379 genes, natural log expression.
"""

from __future__ import annotations

import csv
from importlib import resources

from .errors import InvalidArgumentError
from .matrix import DataMatrix

BENCHMARKS = ("congress_voting", "breast_cancer", "brain_tumor")

# Table 1 selections: (Gabriel, corrected Gabriel, Wold)
PUBLISHED_K = {
    "congress_voting": {"gabriel": 2, "corrected": 2, "wold": 2},
    "breast_cancer": {"gabriel": 3, "corrected": 2, "wold": 3},
    "brain_tumor": {"gabriel": 5, "corrected": 5, "wold": 4},
}


def _path(name: str):
    return resources.files("clustcv").joinpath("data", name)


def dataset_path(name: str):
    if name not in BENCHMARKS:
        raise InvalidArgumentError(f"unknown benchmark {name!r}; choose from {BENCHMARKS}")
    return _path(f"{name}.csv")


def load_benchmark(name: str) -> DataMatrix:
    with resources.as_file(dataset_path(name)) as p:
        return DataMatrix.from_csv(p, header=True)


def load_benchmark_labels(name: str) -> list:
    dataset_path(name)
    with resources.as_file(_path(f"{name}_labels.csv")) as p, open(p, newline="") as fh:
        rows = list(csv.reader(fh))
    return [r[0] for r in rows[1:]]
