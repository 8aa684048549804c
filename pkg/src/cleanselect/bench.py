"""Sweep harness: noise kind/ratio x probability estimator x selector grids
over a synthetic world or an on-disk manifest, scored against ground truth.

Reports land as CSV (deterministic, byte-identical for identical spec and
seeds) and JSON (adds wall-clock timings, which are inherently run-specific).
"""

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import corpus
from .induced import ProbeConfig, fit_probe, knn_probabilities, predict_probe
from .mixfix import MixFixConfig, mixfix_run
from .selection import SelectionResult, consistency_select, intersect, loss_select, selection_quality
from .zeroshot import l2_normalize, zeroshot_probabilities

ESTIMATORS = ("zeroshot", "logistic", "knn")
SELECTORS = ("consistency", "loss", "intersect")


class SweepError(ValueError):
    pass


@dataclass
class SweepSpec:
    world: corpus.SyntheticWorldSpec | None = None
    manifest: str | None = None
    noise_kinds: list[str] = field(default_factory=lambda: ["symmetric"])
    noise_ratios: list[float] = field(default_factory=lambda: [0.2, 0.5, 0.8])
    estimators: list[str] = field(default_factory=lambda: ["zeroshot", "logistic"])
    selectors: list[str] = field(default_factory=lambda: ["consistency", "loss", "intersect"])
    repeats: int = 1
    seeds: list[int] = field(default_factory=lambda: [0])
    theta_consistency: float = 0.8
    theta_loss: float = 0.5
    loss_mode: str = "per_class"
    temperature: float = 100.0
    aggregation: str = "mean"
    knn_k: int | None = None
    pair_map: dict[int, int] | None = None
    include_original: bool = False
    run_mixfix: bool = False
    mixfix: MixFixConfig = field(default_factory=MixFixConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)

    def __post_init__(self):
        if (self.world is None) == (self.manifest is None):
            raise SweepError("exactly one of world/manifest must be given")
        if not self.noise_kinds or not self.noise_ratios or not self.estimators or not self.selectors:
            raise SweepError("sweep axes must be non-empty")
        if self.repeats < 1:
            raise SweepError(f"repeats must be >= 1, got {self.repeats}")
        if len(self.seeds) != self.repeats:
            raise SweepError(f"need one seed per repeat: {self.repeats} repeats, {len(self.seeds)} seeds")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        bad += [s for s in self.selectors if s not in SELECTORS]
        if bad:
            raise SweepError(f"unknown estimators/selectors: {bad}")

    @classmethod
    def from_json(cls, path) -> "SweepSpec":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if "world" in raw and raw["world"] is not None:
            raw["world"] = corpus.SyntheticWorldSpec(**raw["world"])
        if "pair_map" in raw and raw["pair_map"] is not None:
            raw["pair_map"] = {int(k): int(v) for k, v in raw["pair_map"].items()}
        if "mixfix" in raw and raw["mixfix"] is not None:
            mf = dict(raw["mixfix"])
            if "probe" in mf and mf["probe"] is not None:
                mf["probe"] = ProbeConfig(**mf["probe"])
            raw["mixfix"] = MixFixConfig(**mf)
        if "probe" in raw and raw["probe"] is not None:
            raw["probe"] = ProbeConfig(**raw["probe"])
        return cls(**raw)


@dataclass
class CellResult:
    noise_kind: str
    noise_ratio: float
    estimator: str
    selector: str
    repeat: int
    seed: int
    n_selected: int | None = None
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    roc_auc: float | None = None
    mixfix_train_size: int | None = None
    mixfix_train_label_acc: float | None = None
    wall_clock: float | None = None
    error: str | None = None


@dataclass
class SweepReport:
    rows: list[CellResult] = field(default_factory=list)


CSV_COLUMNS = [
    "noise_kind",
    "noise_ratio",
    "estimator",
    "selector",
    "repeat",
    "seed",
    "n_selected",
    "precision",
    "recall",
    "f1",
    "roc_auc",
    "mixfix_train_size",
    "mixfix_train_label_acc",
    "error",
]


def _estimate(name, ds, bank, spec):
    if name == "zeroshot":
        if bank is None:
            raise SweepError("zeroshot estimator needs a prompt bank")
        return zeroshot_probabilities(
            l2_normalize(ds.embeddings), _normalized_bank(bank), spec.temperature, spec.aggregation
        )
    if name == "logistic":
        xn = l2_normalize(ds.embeddings)
        norm = corpus.NoisyDataset(xn, ds.noisy_labels, ds.true_labels, ds.num_classes, list(ds.class_names))
        probe = fit_probe(norm, spec.probe, allow_missing=True)
        return predict_probe(probe, xn)
    return knn_probabilities(ds, spec.knn_k)


def _normalized_bank(bank):
    from .zeroshot import PromptBank

    return PromptBank(list(bank.class_names), [l2_normalize(e) for e in bank.embeddings])


def _select(name, probs, labels, spec) -> SelectionResult:
    if name == "consistency":
        return consistency_select(probs, labels, spec.theta_consistency)
    if name == "loss":
        return loss_select(probs, labels, spec.theta_loss, spec.loss_mode)
    return intersect(
        [
            consistency_select(probs, labels, spec.theta_consistency),
            loss_select(probs, labels, spec.theta_loss, spec.loss_mode),
        ]
    )


def run_sweep(spec: SweepSpec) -> SweepReport:
    """Run every cell; a failing cell is recorded in its row and the sweep
    continues."""
    if spec.world is not None:
        base_ds, bank = corpus.make_synthetic_world(spec.world)
    else:
        base_ds, bank = corpus.load_dataset(spec.manifest)
    if base_ds.true_labels is None:
        raise SweepError("sweep scoring needs true labels on the source dataset")

    report = SweepReport()
    for kind in spec.noise_kinds:
        for ratio in spec.noise_ratios:
            for repeat in range(spec.repeats):
                seed = spec.seeds[repeat]
                try:
                    noise = corpus.NoiseSpec(
                        kind=kind,
                        ratio=ratio,
                        pair_map=spec.pair_map,
                        seed=seed,
                        include_original=spec.include_original,
                    )
                    noisy = corpus.inject_noise(base_ds, noise, prompts=bank)
                except Exception as e:  # noqa: BLE001 - recorded per cell
                    for estimator in spec.estimators:
                        for selector in spec.selectors:
                            report.rows.append(
                                CellResult(kind, ratio, estimator, selector, repeat, seed, error=repr(e))
                            )
                    continue
                for estimator in spec.estimators:
                    try:
                        probs = _estimate(estimator, noisy, bank, spec)
                    except Exception as e:  # noqa: BLE001
                        for selector in spec.selectors:
                            report.rows.append(
                                CellResult(kind, ratio, estimator, selector, repeat, seed, error=repr(e))
                            )
                        continue
                    for selector in spec.selectors:
                        start = time.perf_counter()
                        row = CellResult(kind, ratio, estimator, selector, repeat, seed)
                        try:
                            result = _select(selector, probs, noisy.noisy_labels, spec)
                            quality = selection_quality(result, noisy.noisy_labels, noisy.true_labels)
                            row.n_selected = result.n_selected
                            row.precision = quality.precision
                            row.recall = quality.recall
                            row.f1 = quality.f1
                            row.roc_auc = quality.roc_auc
                            if spec.run_mixfix:
                                state, _ = mixfix_run(noisy, result, spec.mixfix)
                                last = state.history[-1]
                                row.mixfix_train_size = last.n_train
                                row.mixfix_train_label_acc = last.train_label_acc
                        except Exception as e:  # noqa: BLE001
                            row.error = repr(e)
                        row.wall_clock = time.perf_counter() - start
                        report.rows.append(row)
    return report


def emit_roc_points(result: SelectionResult, true_labels, noisy_labels) -> list[tuple[float, float]]:
    """ROC curve of the selection scores against the clean indicator,
    endpoints included. The trapezoidal area under these points equals the
    rank-statistic AUC."""
    noisy = np.asarray(noisy_labels, dtype=np.int64)
    truth = np.asarray(true_labels, dtype=np.int64)
    clean = noisy == truth
    n_pos = int(clean.sum())
    n_neg = clean.size - n_pos
    points = [(0.0, 0.0)]
    if n_pos and n_neg:
        order = np.argsort(-result.scores, kind="mergesort")
        sorted_scores = result.scores[order]
        sorted_clean = clean[order]
        tp = fp = 0
        i = 0
        while i < sorted_scores.size:
            j = i
            while j + 1 < sorted_scores.size and sorted_scores[j + 1] == sorted_scores[i]:
                j += 1
            tp += int(sorted_clean[i : j + 1].sum())
            fp += (j - i + 1) - int(sorted_clean[i : j + 1].sum())
            points.append((fp / n_neg, tp / n_pos))
            i = j + 1
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return points


def trapezoid_area(points: list[tuple[float, float]]) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_report(report: SweepReport, out_dir) -> tuple[Path, Path]:
    """results.csv carries only run-independent fields; results.json adds
    wall-clock timings."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "results.csv"
    with open(csv_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for row in report.rows:
            d = asdict(row)
            writer.writerow([_cell(d[c]) for c in CSV_COLUMNS])
    json_path = out / "results.json"
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump({"rows": [asdict(r) for r in report.rows]}, f, indent=2, sort_keys=True)
        f.write("\n")
    return csv_path, json_path
