import numpy as np
import pytest

from cleanselect import SelectionResult, SweepSpec, SyntheticWorldSpec, emit_roc_points, rank_auc, run_sweep
from cleanselect.bench import SweepError, trapezoid_area, write_report

import oracles


def tiny_world_spec(seed=0):
    return SyntheticWorldSpec(3, 8, 40, 6.0, 1.0, prompts_per_class=2, prompt_jitter_sigma=0.2, seed=seed)


def test_spec_validation():
    with pytest.raises(SweepError):
        SweepSpec(world=None, manifest=None)
    with pytest.raises(SweepError):
        SweepSpec(world=tiny_world_spec(), noise_ratios=[])
    with pytest.raises(SweepError):
        SweepSpec(world=tiny_world_spec(), estimators=["banana"])
    with pytest.raises(SweepError):
        SweepSpec(world=tiny_world_spec(), repeats=2, seeds=[1])


def test_single_cell_zero_noise_perfect_precision():
    spec = SweepSpec(
        world=tiny_world_spec(),
        noise_ratios=[0.0],
        estimators=["zeroshot"],
        selectors=["consistency", "loss", "intersect"],
        seeds=[3],
    )
    report = run_sweep(spec)
    assert len(report.rows) == 3
    for row in report.rows:
        assert row.error is None
        # every sample is clean, so anything selected is clean
        assert row.precision == 1.0


def test_sweep_grid_shape_and_determinism():
    spec = SweepSpec(
        world=tiny_world_spec(seed=5),
        noise_kinds=["symmetric"],
        noise_ratios=[0.2, 0.6],
        estimators=["zeroshot", "knn"],
        selectors=["consistency"],
        repeats=3,
        seeds=[7, 7, 9],
    )
    report = run_sweep(spec)
    assert len(report.rows) == 2 * 2 * 1 * 3
    # identical seeds give identical rows
    by_key = {}
    for row in report.rows:
        by_key.setdefault((row.noise_ratio, row.estimator, row.seed), []).append(row)
    for (ratio, estimator, seed), rows in by_key.items():
        base = rows[0]
        for other in rows[1:]:
            assert other.precision == base.precision
            assert other.roc_auc == base.roc_auc
            assert other.n_selected == base.n_selected


def test_sweep_cell_failure_recorded_not_raised():
    # asymmetric without a pair_map fails per-cell, sweep continues
    spec = SweepSpec(
        world=tiny_world_spec(),
        noise_kinds=["asymmetric", "symmetric"],
        noise_ratios=[0.3],
        estimators=["zeroshot"],
        selectors=["consistency"],
        seeds=[1],
    )
    report = run_sweep(spec)
    errors = [r for r in report.rows if r.error]
    fine = [r for r in report.rows if not r.error]
    assert len(errors) == 1 and errors[0].noise_kind == "asymmetric"
    assert len(fine) == 1 and fine[0].precision is not None


def test_sweep_csv_byte_identical(tmp_path):
    spec = SweepSpec(
        world=tiny_world_spec(seed=2),
        noise_ratios=[0.4],
        estimators=["zeroshot", "logistic"],
        selectors=["consistency", "intersect"],
        seeds=[13],
    )
    csv1, _ = write_report(run_sweep(spec), tmp_path / "a")
    csv2, _ = write_report(run_sweep(spec), tmp_path / "b")
    assert csv1.read_bytes() == csv2.read_bytes()


def test_sweep_from_manifest(fixture_dir, tmp_path):
    spec = SweepSpec(
        manifest=str(fixture_dir / "small" / "manifest.json"),
        noise_ratios=[0.3],
        estimators=["zeroshot"],
        selectors=["intersect"],
        seeds=[5],
        run_mixfix=True,
    )
    report = run_sweep(spec)
    assert len(report.rows) == 1
    row = report.rows[0]
    assert row.error is None
    assert row.mixfix_train_size >= row.n_selected
    csv_path, json_path = write_report(report, tmp_path)
    assert csv_path.exists() and json_path.exists()


def test_spec_round_trip_from_json(tmp_path):
    raw = """
    {
      "world": {"num_classes": 3, "dim": 8, "samples_per_class": 40,
                "centroid_separation": 6.0, "cluster_sigma": 1.0,
                "prompts_per_class": 2, "prompt_jitter_sigma": 0.2, "seed": 4},
      "noise_kinds": ["symmetric"],
      "noise_ratios": [0.2, 0.5],
      "estimators": ["zeroshot"],
      "selectors": ["consistency"],
      "repeats": 1,
      "seeds": [11],
      "mixfix": {"theta_r": 0.7, "theta_r_prime": 0.9, "epochs": 2}
    }
    """
    path = tmp_path / "spec.json"
    path.write_text(raw)
    spec = SweepSpec.from_json(path)
    assert spec.world.num_classes == 3
    assert spec.mixfix.theta_r_prime == 0.9
    report = run_sweep(spec)
    assert len(report.rows) == 2


# --- ROC points ---


def test_roc_perfect_scores_reaches_corner():
    scores = np.array([0.9, 0.8, 0.2, 0.1])
    noisy = np.array([0, 0, 1, 1])
    truth = np.array([0, 0, 0, 0])
    res = SelectionResult(scores, scores >= 0.5, "r", 0.5)
    points = emit_roc_points(res, truth, noisy)
    assert (0.0, 1.0) in points
    assert points[0] == (0.0, 0.0) and points[-1] == (1.0, 1.0)


def test_roc_constant_scores_two_points():
    scores = np.full(6, 0.4)
    noisy = np.array([0, 0, 0, 1, 1, 1])
    truth = np.zeros(6, dtype=np.int64)
    res = SelectionResult(scores, scores >= 0.5, "r", 0.5)
    points = emit_roc_points(res, truth, noisy)
    assert points == [(0.0, 0.0), (1.0, 1.0)]
    assert trapezoid_area(points) == 0.5


def test_roc_hand_case_area():
    scores = np.array([0.9, 0.8, 0.2, 0.1])
    noisy = np.array([0, 1, 0, 1])
    truth = np.array([0, 0, 0, 0])
    res = SelectionResult(scores, scores >= 0.5, "r", 0.5)
    area = trapezoid_area(emit_roc_points(res, truth, noisy))
    assert abs(area - 0.75) < 1e-12
    assert area == oracles.pairwise_auc(scores, noisy == truth)


def test_roc_area_equals_rank_auc_with_ties():
    rng = np.random.default_rng(8)
    for _ in range(25):
        n = int(rng.integers(5, 80))
        scores = np.round(rng.random(n), 1)  # heavy ties
        noisy = rng.integers(0, 2, size=n)
        truth = np.zeros(n, dtype=np.int64)
        clean = noisy == truth
        if clean.all() or not clean.any():
            continue
        res = SelectionResult(scores, scores >= 0.5, "r", 0.5)
        area = trapezoid_area(emit_roc_points(res, truth, noisy))
        assert abs(area - rank_auc(scores, clean)) < 1e-9
