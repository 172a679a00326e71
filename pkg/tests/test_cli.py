import json

import numpy as np
import pytest

from clustcv.cli import main
from clustcv.datasets import BENCHMARKS, load_benchmark, load_benchmark_labels
from clustcv.experiments import derive_seed, grid_points, modal_k, simulate, two_cluster_trial
from clustcv.simgen import make_spec


@pytest.fixture
def blobs_csv(tmp_path):
    rng = np.random.default_rng(0)
    centers = np.outer([0.0, 7.0, 14.0], np.ones(4))
    x = centers[np.arange(45) % 3] + rng.standard_normal((45, 4))
    path = tmp_path / "blobs.csv"
    np.savetxt(path, x, delimiter=",", header="a,b,c,d", comments="")
    return path


def test_select_table(blobs_csv, capsys):
    assert main(["select", "-i", str(blobs_csv), "--k-max", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,mean_cv_error,selected"
    assert len(lines) == 6
    assert lines[3].endswith(",1")


def test_select_corrected_json(blobs_csv, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["select", "-i", str(blobs_csv), "--k-max", "5", "--corrected",
                 "--format", "json", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["report"]["corrected"] is True
    assert "stage1" in doc
    assert f"selected_k={doc['selected_k']}" in capsys.readouterr().out


def test_select_long(blobs_csv, capsys):
    main(["select", "-i", str(blobs_csv), "--k-max", "2", "--long"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,fold_r,fold_s,cv_error"
    assert len(lines) == 1 + 2 * 10


def test_wold_cli_with_na(tmp_path, capsys):
    rng = np.random.default_rng(1)
    x = np.outer(np.arange(30) % 2 * 5.0, np.ones(4)) + rng.standard_normal((30, 4))
    rows = [",".join("NA" if (i * 4 + j) % 17 == 0 else f"{v:.4f}" for j, v in enumerate(r))
            for i, r in enumerate(x)]
    path = tmp_path / "na.csv"
    path.write_text("\n".join(rows) + "\n")
    assert main(["wold", "-i", str(path), "--k-max", "4"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "k,mean_cv_error,selected"


def test_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    assert main(["select", "-i", str(bad)]) == 1
    assert "error:" in capsys.readouterr().err
    assert main(["select", "-i", str(tmp_path / "missing.csv")]) == 1
    assert main(["simulate"]) == 1


def test_elbow(blobs_csv, capsys):
    assert main(["elbow", "-i", str(blobs_csv), "--k-max", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,W_k"
    w = [float(l.split(",")[1]) for l in lines[1:]]
    assert w == sorted(w, reverse=True)


def test_simulate_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"spec": {"setting": "var_hetero", "value": 5, "seed": 1}, "replicates": 1}))
    assert main(["simulate", "-c", str(cfg), "--methods", "gabriel", "--k-max", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("method,setting,param")
    assert lines[1].startswith("gabriel,var_hetero,5,")


def test_simulate_zero_replicates():
    assert simulate(make_spec("var_hetero", 1), 0) == []


def test_benchmarks_load():
    shapes = {"congress_voting": (232, 16), "breast_cancer": (683, 9), "brain_tumor": (42, 1379)}
    for name in BENCHMARKS:
        d = load_benchmark(name)
        assert d.shape == shapes[name]
        assert not d.has_missing
        assert len(load_benchmark_labels(name)) == d.n_rows


def test_modal_k_and_seeds():
    assert modal_k([3, 2, 3, 2, 4]) == 2
    assert modal_k([5, 5, 1]) == 5
    assert derive_seed(1, 2) == derive_seed(1, 2) != derive_seed(2, 1)


def test_grid_points_and_trial():
    pts = grid_points()
    assert len(pts) == 30
    assert (3.0, 1.0) in pts and (0.0, 0.0) in pts
    # (1, 1) sits 0.19 from the boundary
    assert (1.0, 1.0) not in pts
    assert two_cluster_trial(3.0, 3.0, n=2000, seed=0) == 2
