import os

import numpy as np
import pytest
from click.testing import CliRunner

from genberan.cli import main

FIXTURE = os.path.join(os.path.dirname(__file__), "data", "clinical_sample.csv")


@pytest.fixture
def runner():
    return CliRunner()


def _run(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


def _tree(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            p = os.path.join(dirpath, f)
            out[os.path.relpath(p, root)] = open(p, "rb").read()
    return out


def test_simulate_writes_samples_and_manifest(runner, tmp_path):
    out = tmp_path / "sim"
    _run(runner, ["--out-dir", str(out), "--seed", "5",
                  "simulate", "--n", "20", "--reps", "2"])
    assert (out / "sample_0000.csv").exists()
    assert (out / "sample_0001.csv").exists()
    manifest = (out / "manifest.txt").read_text()
    assert "model = exponential" in manifest and "seed = 5" in manifest
    header = (out / "sample_0000.csv").read_text().splitlines()[0]
    assert header == "t,event,x1"


def test_simulate_multidim(runner, tmp_path):
    out = tmp_path / "sim"
    _run(runner, ["--out-dir", str(out), "simulate", "--model", "multidim",
                  "--n", "10", "--reps", "1"])
    header = (out / "sample_0000.csv").read_text().splitlines()[0]
    assert header == "t,event,x1,x2,x3,x4,x5"


def test_train_classifier_logistic(runner, tmp_path):
    out = tmp_path / "out"
    result = _run(runner, ["--out-dir", str(out), "train-classifier", FIXTURE,
                           "--variant", "logistic", "--val-split", "0.3"])
    assert "held-out cross-entropy" in result.output
    assert (out / "model.json").exists()


def test_train_classifier_nw_and_mlp(runner, tmp_path):
    out = tmp_path / "out"
    _run(runner, ["--out-dir", str(out), "train-classifier", FIXTURE,
                  "--variant", "nw", "--model-out", "nw.json"])
    assert (out / "nw.json").exists()
    cfg = tmp_path / "fast.cfg"
    cfg.write_text("[classifier]\nepochs = 2\n")
    _run(runner, ["--config", str(cfg), "--out-dir", str(out),
                  "train-classifier", FIXTURE, "--variant", "mlp",
                  "--model-out", "mlp.json"])
    assert (out / "mlp.json").exists()


def test_select_bandwidth_command(runner, tmp_path):
    out = tmp_path / "out"
    result = _run(runner, ["--out-dir", str(out), "select-bandwidth", FIXTURE])
    assert "h_best" in result.output
    lines = (out / "bandwidth_scores.csv").read_text().splitlines()
    assert lines[0] == "h,score" and len(lines) == 11


def test_fit_command_writes_curve_and_figure(runner, tmp_path):
    out = tmp_path / "out"
    _run(runner, ["--out-dir", str(out), "fit", FIXTURE,
                  "--x", "0.5,0.5,0.5,0.5", "--h", "0.8"])
    csv_lines = (out / "curve.csv").read_text().splitlines()
    assert csv_lines[0] == "t,cdf,survival"
    svg = (out / "curve.svg").read_bytes()
    assert svg.startswith(b"<?xml")


def test_study_command_outputs(runner, tmp_path):
    out = tmp_path / "out"
    result = _run(runner, ["--out-dir", str(out), "study",
                           "--n", "50", "--reps", "2",
                           "--variants", "beran,gbe-oracle"])
    assert "mean MISE" in result.output
    for name in ("summary_observed.csv", "replications_observed.csv",
                 "mse_curves_observed.csv", "mse_curves_observed.svg"):
        assert (out / name).exists(), name
    summary = (out / "summary_observed.csv").read_text().splitlines()
    assert summary[0] == "variant,mean_mise,sd_mise,p_value,significant"
    assert len(summary) == 3


def test_study_both_regimes(runner, tmp_path):
    out = tmp_path / "out"
    _run(runner, ["--out-dir", str(out), "study", "--n", "50", "--reps", "2",
                  "--variants", "beran,gbe-oracle", "--regime", "both"])
    assert (out / "summary_observed.csv").exists()
    assert (out / "summary_missing.csv").exists()


def test_real_data_command(runner, tmp_path):
    out = tmp_path / "out"
    cfg = tmp_path / "fast.cfg"
    cfg.write_text("[real_data]\nsplits = 2\ngrid_size = 20\n"
                   "[classifier]\nepochs = 2\n")
    _run(runner, ["--config", str(cfg), "--out-dir", str(out),
                  "real-data", FIXTURE, "--variants", "beran,gbe-linear",
                  "--h", "0.9"])
    for j in (1, 2, 3):
        assert (out / f"survival_q{j}.csv").exists()
        assert (out / f"survival_q{j}.svg").exists()
    head = (out / "survival_q1.csv").read_text().splitlines()[0]
    assert head.startswith("t,")


def test_diagnostics_lemma1(runner, tmp_path):
    result = _run(runner, ["--out-dir", str(tmp_path), "diagnostics", "lemma1",
                           "--n", "200"])
    assert "ok = True" in result.output


def test_diagnostics_variance(runner, tmp_path):
    result = _run(runner, ["--out-dir", str(tmp_path), "diagnostics",
                           "variance", "--n", "200", "--reps", "30"])
    assert "ratio =" in result.output


def test_outputs_byte_identical_across_reruns_and_threads(runner, tmp_path):
    """The whole report directory must be reproducible, including figures,
    and independent of the worker count."""
    trees = []
    for tag, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        out = tmp_path / tag
        _run(runner, ["--out-dir", str(out), "--seed", "3",
                      "--threads", threads, "study", "--n", "40",
                      "--reps", "3", "--variants", "beran,gbe-oracle"])
        trees.append(_tree(out))
    assert trees[0].keys() == trees[1].keys() == trees[2].keys()
    for name in trees[0]:
        assert trees[0][name] == trees[1][name], f"{name} differs across reruns"
        assert trees[0][name] == trees[2][name], f"{name} differs across threads"


def test_unknown_model_errors(runner, tmp_path):
    result = runner.invoke(main, ["--out-dir", str(tmp_path), "study",
                                  "--model", "bogus"])
    assert result.exit_code != 0
