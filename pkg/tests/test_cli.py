import csv
import json

import numpy as np

from autoad.cli import main
from autoad.orchestrator import series_to_doc
from autoad.series import TimeSeries


def make_job_file(tmp_path, n=240, seed=0):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    values = 10 + 2 * np.sin(2 * np.pi * t / 24) + rng.normal(0, 0.5, n)
    series = TimeSeries.from_values(values, step=3600)
    spec = {
        "job_id": "cli-job",
        "metric_id": "cli-metric",
        "source": {"inline": series_to_doc(series)},
        "train_every": 48,
        "score_every": 1,
        "model_ttl": 96,
        "alpha": 0.5,
        "alert_threshold": 0.95,
    }
    path = tmp_path / "job.json"
    path.write_text(json.dumps(spec))
    return path


def test_register_run_status_eval_round_trip(tmp_path, capsys):
    job = make_job_file(tmp_path)
    data_dir = str(tmp_path / "store")

    assert main(["register", "--spec", str(job), "--data-dir", data_dir]) == 0
    assert "registered job cli-job" in capsys.readouterr().out

    assert main(["run", "--until", "200", "--data-dir", data_dir]) == 0
    out = capsys.readouterr().out
    assert "advanced clock to 200" in out
    assert "cli-metric" in out

    assert main(["status", "--data-dir", data_dir]) == 0
    out = capsys.readouterr().out
    assert "cli-metric" in out
    assert any(h in out for h in (" G", " Y", " R"))

    curves = tmp_path / "curves.csv"
    assert main([
        "eval", "--metric", "cli-metric", "--data-dir", data_dir,
        "--emit-curves", str(curves),
    ]) == 0
    with open(curves, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["curve", "x", "value"]
    kinds = {row[0] for row in rows[1:]}
    assert kinds == {"mv", "em"}


def test_register_twice_is_idempotent(tmp_path, capsys):
    job = make_job_file(tmp_path)
    data_dir = str(tmp_path / "store")
    assert main(["register", "--spec", str(job), "--data-dir", data_dir]) == 0
    assert main(["register", "--spec", str(job), "--data-dir", data_dir]) == 0


def test_eval_unknown_metric(tmp_path, capsys):
    data_dir = str(tmp_path / "store")
    assert main(["eval", "--metric", "nope", "--data-dir", data_dir]) == 2


def test_bench_fixture_only(tmp_path, capsys):
    out_dir = tmp_path / "report"
    code = main([
        "--tune-budget", "10",
        "bench", "--fixtures", "--datasets", "nyc_taxi", "--freq", "daily",
        "--out", str(out_dir),
    ])
    assert code == 0
    assert (out_dir / "auc.csv").exists()
    assert (out_dir / "forecast.csv").exists()
    assert (out_dir / "roc_points.csv").exists()
    printed = capsys.readouterr().out
    assert "benchmark complete" in printed
