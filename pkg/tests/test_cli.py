import json
import subprocess
import sys

import numpy as np
import pytest

from cleanselect.cli import dispatch
from cleanselect.formats import load_embeddings, load_labels, load_probe_params


@pytest.fixture()
def small_manifest(fixture_dir):
    return str(fixture_dir / "small" / "manifest.json")


def test_help_exits_zero(capsys):
    assert dispatch(["--help"]) == 0
    assert "usage" in capsys.readouterr().out


def test_unknown_subcommand_exits_two(capsys):
    assert dispatch(["frobnicate"]) == 2


def test_unknown_flag_exits_two(small_manifest):
    assert dispatch(["zeroshot", "--manifest", small_manifest, "--nope", "--out", "x"]) == 2


def test_missing_file_is_single_line_error(tmp_path, capsys):
    code = dispatch(["zeroshot", "--manifest", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.emb1")])
    assert code == 1
    err = capsys.readouterr().err.strip()
    assert err.startswith("error:")
    assert "\n" not in err


def test_unknown_preset_fails_before_work(tmp_path, small_manifest, capsys):
    out = tmp_path / "p.emb1"
    code = dispatch(["zeroshot", "--manifest", small_manifest, "--preset", "nope", "--out", str(out)])
    assert code == 1
    assert not out.exists()


def test_full_pipeline_on_committed_fixture(tmp_path, small_manifest, fixture_dir):
    base = fixture_dir / "small"
    noisy = tmp_path / "noisy.lab1"
    noisy_manifest = tmp_path / "manifest_noisy.json"

    assert dispatch([
        "inject-noise", "--manifest", small_manifest, "--kind", "symmetric",
        "--ratio", "0.3", "--seed", "5", "--out", str(noisy),
        "--out-manifest", str(noisy_manifest),
    ]) == 0
    labels = load_labels(noisy)
    truth = load_labels(base / "true_labels.lab1")
    assert labels.shape == (300,)
    assert 0.2 < np.mean(labels != truth) < 0.4

    probs = tmp_path / "probs.emb1"
    assert dispatch(["zeroshot", "--manifest", str(noisy_manifest), "--temperature", "100", "--agg", "mean", "--out", str(probs)]) == 0
    p = load_embeddings(probs)
    assert p.shape == (300, 3)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-4)

    mask = tmp_path / "mask.lab1"
    report = tmp_path / "report.json"
    assert dispatch([
        "select", "--probs", str(probs), "--labels", str(noisy),
        "--selector", "both-intersect", "--truth", str(base / "true_labels.lab1"),
        "--out", str(mask), "--report", str(report),
    ]) == 0
    rep = json.loads(report.read_text())
    assert rep["n"] == 300
    assert rep["precision"] is not None and rep["precision"] > 0.9
    m = load_labels(mask)
    assert set(np.unique(m)) <= {0, 1}
    assert m.sum() == rep["n_selected"]

    model = tmp_path / "model.bin"
    history = tmp_path / "history.csv"
    assert dispatch([
        "mixfix", "--manifest", str(noisy_manifest), "--mask", str(mask),
        "--theta-r", "0.7", "--theta-rp", "0.8", "--epochs", "5",
        "--out", str(model), "--history", str(history),
    ]) == 0
    w, b = load_probe_params(model)
    assert w.shape == (3, 8) and b.shape == (3,)
    lines = history.read_text().strip().splitlines()
    assert lines[0] == "epoch,n_train,n_absorbed,n_relabeled,train_label_acc,holdout_acc"
    assert len(lines) == 7  # header + epoch 0 + 5 epochs

    eval_report = tmp_path / "eval.json"
    assert dispatch([
        "evaluate", "--mask", str(mask), "--labels", str(noisy),
        "--truth", str(base / "true_labels.lab1"), "--report", str(eval_report),
    ]) == 0
    ev = json.loads(eval_report.read_text())
    assert ev["precision"] == rep["precision"]


def test_evaluate_with_continuous_scores(tmp_path, fixture_dir):
    from cleanselect.formats import save_embeddings, save_labels

    rng = np.random.default_rng(3)
    n = 40
    noisy = rng.integers(0, 3, size=n)
    truth = noisy.copy()
    truth[:10] = (truth[:10] + 1) % 3  # first 10 samples are mislabeled
    clean = noisy == truth
    scores = np.where(clean, 0.9, 0.1) + rng.normal(0, 0.01, n)
    mask = scores >= 0.5

    paths = {}
    for name, arr in [("mask", mask.astype(np.int64)), ("labels", noisy), ("truth", truth)]:
        paths[name] = tmp_path / f"{name}.lab1"
        save_labels(arr, paths[name])
    scores_path = tmp_path / "scores.emb1"
    save_embeddings(scores.reshape(-1, 1), scores_path)

    report = tmp_path / "r.json"
    assert dispatch([
        "evaluate", "--mask", str(paths["mask"]), "--labels", str(paths["labels"]),
        "--truth", str(paths["truth"]), "--scores", str(scores_path), "--report", str(report),
    ]) == 0
    rep = json.loads(report.read_text())
    assert rep["precision"] == 1.0 and rep["recall"] == 1.0
    assert rep["roc_auc"] > 0.99  # continuous scores drive the AUC


def test_probe_subcommand_modes(tmp_path, fixture_dir):
    manifest = str(fixture_dir / "small" / "manifest.json")
    for mode in ("logistic", "knn"):
        out = tmp_path / f"{mode}.emb1"
        assert dispatch(["probe", "--manifest", manifest, "--mode", mode, "--out", str(out)]) == 0
        p = load_embeddings(out)
        assert p.shape == (300, 3)


def test_outputs_byte_identical_across_invocations(tmp_path, small_manifest):
    a = tmp_path / "a.emb1"
    b = tmp_path / "b.emb1"
    for out in (a, b):
        assert dispatch(["zeroshot", "--manifest", small_manifest, "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_preset_sets_thresholds(tmp_path, small_manifest, fixture_dir):
    base = fixture_dir / "small"
    probs = tmp_path / "p.emb1"
    assert dispatch(["zeroshot", "--manifest", small_manifest, "--out", str(probs)]) == 0
    mask_strict = tmp_path / "strict.lab1"
    mask_loose = tmp_path / "loose.lab1"
    labels = str(base / "labels.lab1")
    assert dispatch([
        "select", "--probs", str(probs), "--labels", labels, "--selector", "consistency",
        "--preset", "consistency-strict", "--out", str(mask_strict),
    ]) == 0
    assert dispatch([
        "select", "--probs", str(probs), "--labels", labels, "--selector", "consistency",
        "--theta-consistency", "0.1", "--out", str(mask_loose),
    ]) == 0
    assert load_labels(mask_strict).sum() <= load_labels(mask_loose).sum()


def test_config_file_defaults_flags_win(tmp_path, small_manifest):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"temperature": 17.0}))
    a = tmp_path / "a.emb1"
    b = tmp_path / "b.emb1"
    c = tmp_path / "c.emb1"
    assert dispatch(["zeroshot", "--manifest", small_manifest, "--config", str(cfg), "--out", str(a)]) == 0
    assert dispatch(["zeroshot", "--manifest", small_manifest, "--temperature", "17", "--out", str(b)]) == 0
    assert dispatch(["zeroshot", "--manifest", small_manifest, "--config", str(cfg), "--temperature", "99", "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()  # config default applied
    assert c.read_bytes() != a.read_bytes()  # explicit flag wins


def test_simulate_subcommand(tmp_path, fixture_dir):
    spec = {
        "manifest": str(fixture_dir / "small" / "manifest.json"),
        "noise_kinds": ["symmetric"],
        "noise_ratios": [0.2, 0.5],
        "estimators": ["zeroshot"],
        "selectors": ["consistency", "intersect"],
        "repeats": 1,
        "seeds": [3],
    }
    spec_path = tmp_path / "sweep.json"
    spec_path.write_text(json.dumps(spec))
    out_dir = tmp_path / "results"
    assert dispatch(["simulate", "--spec", str(spec_path), "--out-dir", str(out_dir)]) == 0
    csv_text = (out_dir / "results.csv").read_text()
    assert csv_text.count("\n") == 5  # header + 4 rows
    rows = json.loads((out_dir / "results.json").read_text())["rows"]
    assert len(rows) == 4
    assert all(r["error"] is None for r in rows)


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "cleanselect", "--help"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "usage" in proc.stdout
