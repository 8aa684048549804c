"""Sample selectors over probability estimates, their conservative
intersection, and selection quality metrics."""

import logging
from dataclasses import dataclass, field

import numpy as np

from .gmm import DegenerateDataError, Gmm1D, fit_em, posterior_small

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12  # the per-sample loss -log(p) is undefined at p = 0


class SelectionError(ValueError):
    pass


@dataclass
class SelectionResult:
    scores: np.ndarray
    mask: np.ndarray
    selector_id: str
    threshold: float
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.scores.shape != self.mask.shape or self.scores.ndim != 1:
            raise SelectionError(f"scores {self.scores.shape} and mask {self.mask.shape} must be equal 1-D")

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    @property
    def n_selected(self) -> int:
        return int(self.mask.sum())


@dataclass
class SelectionQuality:
    precision: float | None
    recall: float | None
    f1: float | None
    roc_auc: float | None
    per_class_selected_counts: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))


def _check_probs(probs, labels):
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if p.ndim != 2:
        raise SelectionError(f"probabilities must be 2-D, got shape {p.shape}")
    if y.shape != (p.shape[0],):
        raise SelectionError(f"labels length {y.shape} does not match probabilities rows {p.shape[0]}")
    if y.size and (y.min() < 0 or y.max() >= p.shape[1]):
        raise SelectionError("labels outside the probability columns")
    sums = p.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-4) or np.any(p < -1e-9):
        raise SelectionError("probability rows must each sum to 1")
    return p, y


def consistency_select(probs, labels, threshold: float = 0.8) -> SelectionResult:
    """Score = P(noisy label) / max-class probability; the score is exactly 1
    when the noisy label attains the row maximum."""
    if not 0.0 < threshold <= 1.0:
        raise SelectionError(f"consistency threshold must be in (0, 1], got {threshold}")
    p, y = _check_probs(probs, labels)
    scores = p[np.arange(p.shape[0]), y] / p.max(axis=1)
    return SelectionResult(scores, scores >= threshold, "consistency", threshold)


def loss_select(
    probs,
    labels,
    threshold: float = 0.5,
    mode: str = "per_class",
    max_iters: int = 100,
    tol: float = 1e-6,
) -> SelectionResult:
    """Score = posterior of the small-mean mixture component over per-sample
    losses -log P(noisy label).

    per_class fits one mixture per noisy-label class; a class whose losses
    are degenerate (fewer than two distinct values) falls back to the global
    model and is reported in warnings. single fits one global mixture.
    """
    if not 0.0 <= threshold <= 1.0:
        raise SelectionError(f"loss threshold must be in [0, 1], got {threshold}")
    if mode not in ("per_class", "single"):
        raise SelectionError(f"mode must be 'per_class' or 'single', got {mode!r}")
    p, y = _check_probs(probs, labels)
    losses = -np.log(np.maximum(p[np.arange(p.shape[0]), y], PROB_FLOOR))

    warnings: list[str] = []
    scores = np.empty_like(losses)

    def global_model() -> Gmm1D | None:
        try:
            return fit_em(losses, max_iters=max_iters, tol=tol)
        except DegenerateDataError:
            warnings.append("global losses degenerate; scores set to 0.5")
            return None

    if mode == "single":
        model = global_model()
        scores[:] = posterior_small(model, losses) if model is not None else 0.5
    else:
        fallback: Gmm1D | None = None
        fallback_ready = False
        for c in np.unique(y):
            idx = np.flatnonzero(y == c)
            try:
                model = fit_em(losses[idx], max_iters=max_iters, tol=tol)
            except DegenerateDataError:
                warnings.append(f"class {c}: degenerate losses, using the global model")
                if not fallback_ready:
                    fallback = global_model()
                    fallback_ready = True
                model = fallback
            scores[idx] = posterior_small(model, losses[idx]) if model is not None else 0.5
    for w in warnings:
        logger.warning("loss_select: %s", w)
    return SelectionResult(scores, scores >= threshold, f"loss:{mode}", threshold, tuple(warnings))


def intersect(results: list[SelectionResult]) -> SelectionResult:
    """Conservative combination: mask = AND of masks, score = element-wise
    minimum. Not threshold-based, so the recorded threshold is NaN."""
    if not results:
        raise SelectionError("intersect needs at least one selection result")
    n = results[0].n
    if any(r.n != n for r in results):
        raise SelectionError(f"selection lengths differ: {[r.n for r in results]}")
    mask = np.logical_and.reduce([r.mask for r in results])
    scores = np.minimum.reduce([r.scores for r in results])
    ident = "intersect(" + ",".join(r.selector_id for r in results) + ")"
    warnings = tuple(w for r in results for w in r.warnings)
    return SelectionResult(scores, mask, ident, float("nan"), warnings)


def rank_auc(scores, positives) -> float | None:
    """Mann-Whitney AUC of scores against a boolean indicator; ties get half
    credit. None when either group is empty."""
    s = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(positives, dtype=bool)
    n_pos = int(pos.sum())
    n_neg = s.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    order = np.argsort(s, kind="mergesort")
    sorted_scores = s[order]
    ranks = np.empty(s.size, dtype=np.float64)
    i = 0
    while i < s.size:
        j = i
        while j + 1 < s.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average of 1-based ranks i+1..j+1
        i = j + 1
    total = float(ranks[pos].sum())
    return (total - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def selection_quality(result: SelectionResult, noisy_labels, true_labels) -> SelectionQuality:
    """Score a selection against ground truth. clean_i = (noisy == truth).
    With an empty selection, precision is None (explicit no-selection signal,
    never silently 0)."""
    noisy = np.asarray(noisy_labels, dtype=np.int64)
    truth = np.asarray(true_labels, dtype=np.int64)
    if noisy.shape != truth.shape or noisy.shape != (result.n,):
        raise SelectionError("label vectors must match the selection length")
    clean = noisy == truth
    mask = result.mask
    n_sel = int(mask.sum())
    tp = int((mask & clean).sum())
    n_clean = int(clean.sum())

    precision = tp / n_sel if n_sel > 0 else None
    recall = tp / n_clean if n_clean > 0 else None
    if precision is None or recall is None:
        f1 = None
    elif precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)

    num_classes = int(max(noisy.max(), truth.max())) + 1 if noisy.size else 0
    counts = np.bincount(noisy[mask], minlength=num_classes)
    return SelectionQuality(precision, recall, f1, rank_auc(result.scores, clean), counts)
