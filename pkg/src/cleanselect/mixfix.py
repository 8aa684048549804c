"""Semi-supervised training loop over a selected clean subset.

Each epoch the current probe re-scores every non-selected sample and the
loop either absorbs it (confident, label agrees), relabels it (very
confident, label disagrees) or drops it. Selected samples always stay in
the training set with their original labels. Decisions are re-made from
scratch every epoch unless sticky mode is on.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .induced import LinearProbe, ProbeConfig, _descend, predict_probe
from .selection import SelectionResult

TAG_SELECTED = 0
TAG_ABSORBED = 1
TAG_RELABELED = 2
TAG_DROPPED = 3

DECISION_DROP = "drop"
DECISION_ABSORB = "absorb"
DECISION_RELABEL = "relabel"


class MixFixError(ValueError):
    pass


class EmptySelectionError(MixFixError):
    """Upstream selection produced an empty subset; the loop cannot start."""


@dataclass(frozen=True)
class MixFixConfig:
    theta_r: float = 0.7  # absorb threshold
    theta_r_prime: float = 0.8  # relabel threshold
    epochs: int = 100
    probe: ProbeConfig = field(default_factory=lambda: ProbeConfig(iterations=20))
    sticky: bool = False
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.theta_r <= self.theta_r_prime <= 1.0):
            raise MixFixError(
                f"thresholds must satisfy 0 < theta_r <= theta_r_prime <= 1, got {self.theta_r}, {self.theta_r_prime}"
            )
        if self.epochs < 0:
            raise MixFixError(f"epochs must be >= 0, got {self.epochs}")


@dataclass
class EpochStats:
    epoch: int
    n_train: int
    n_absorbed: int
    n_relabeled: int
    train_label_acc: float | None
    holdout_acc: float | None


@dataclass
class TrainState:
    epoch: int
    probe: LinearProbe
    active_mask: np.ndarray
    active_labels: np.ndarray
    tags: np.ndarray
    history: list[EpochStats] = field(default_factory=list)


def mixfix_decide(p, y: int, theta_r: float, theta_r_prime: float) -> tuple[str, int]:
    """Decide one sample from its probability row. Comparisons are strict;
    the region theta_r < p_max <= theta_r_prime with a disagreeing label is
    dropped (conservative reading). Argmax ties go to the lowest class."""
    row = np.asarray(p, dtype=np.float64)
    if row.ndim != 1 or abs(float(row.sum()) - 1.0) > 1e-4 or np.any(row < -1e-9):
        raise MixFixError(f"invalid probability row: {row}")
    p_max = float(row.max())
    y_max = int(row.argmax())
    if p_max > theta_r and y == y_max:
        return DECISION_ABSORB, y
    if p_max > theta_r_prime and y != y_max:
        return DECISION_RELABEL, y_max
    return DECISION_DROP, y


def _decide_batch(probs, labels, theta_r, theta_r_prime):
    p_max = probs.max(axis=1)
    y_max = probs.argmax(axis=1)
    absorb = (p_max > theta_r) & (labels == y_max)
    relabel = (p_max > theta_r_prime) & (labels != y_max)
    return absorb, relabel, y_max


def init_state(ds, selected: SelectionResult, cfg: MixFixConfig) -> TrainState:
    if selected.n != ds.n:
        raise MixFixError(f"selection length {selected.n} does not match dataset size {ds.n}")
    if selected.n_selected == 0:
        raise EmptySelectionError("selected subset is empty; selection failed upstream")
    tags = np.where(selected.mask, TAG_SELECTED, TAG_DROPPED).astype(np.int8)
    probe = LinearProbe(weights=np.zeros((ds.num_classes, ds.dim)), bias=np.zeros(ds.num_classes))
    state = TrainState(
        epoch=0,
        probe=probe,
        active_mask=selected.mask.copy(),
        active_labels=ds.noisy_labels.copy(),
        tags=tags,
        history=[],
    )
    state.history.append(_stats(state, ds, None, None))
    return state


def _stats(state: TrainState, ds, holdout, holdout_labels) -> EpochStats:
    active = state.active_mask
    acc = None
    if ds.true_labels is not None:
        acc = float(np.mean(state.active_labels[active] == ds.true_labels[active]))
    h_acc = None
    if holdout is not None and holdout_labels is not None:
        pred = predict_probe(state.probe, holdout).argmax(axis=1)
        h_acc = float(np.mean(pred == holdout_labels))
    return EpochStats(
        epoch=state.epoch,
        n_train=int(active.sum()),
        n_absorbed=int(np.sum(state.tags == TAG_ABSORBED)),
        n_relabeled=int(np.sum(state.tags == TAG_RELABELED)),
        train_label_acc=acc,
        holdout_acc=h_acc,
    )


def mixfix_epoch(
    state: TrainState,
    ds,
    selected: SelectionResult,
    cfg: MixFixConfig,
    predict_fn=None,
    holdout=None,
    holdout_labels=None,
) -> TrainState:
    """One absorb/relabel/drop pass plus one probe training pass on the
    resulting training set. predict_fn(embeddings) -> probability rows can be
    injected (defaults to the state's probe)."""
    if selected.n_selected == 0:
        raise EmptySelectionError("selected subset is empty; selection failed upstream")
    if predict_fn is None:
        probe = state.probe
        predict_fn = lambda e: predict_probe(probe, e)  # noqa: E731

    sel = selected.mask
    non_sel = np.flatnonzero(~sel)

    tags = np.where(sel, TAG_SELECTED, TAG_DROPPED).astype(np.int8)
    labels = np.where(sel, ds.noisy_labels, state.active_labels if cfg.sticky else ds.noisy_labels)

    if cfg.sticky:
        # cumulative mode: earlier absorb/relabel outcomes persist, only
        # previously dropped samples are re-decided
        keep = np.isin(state.tags, (TAG_ABSORBED, TAG_RELABELED)) & ~sel
        tags[keep] = state.tags[keep]
        redecide = non_sel[state.tags[non_sel] == TAG_DROPPED]
    else:
        redecide = non_sel

    if redecide.size:
        probs = predict_fn(ds.embeddings[redecide])
        absorb, relabel, y_max = _decide_batch(probs, ds.noisy_labels[redecide], cfg.theta_r, cfg.theta_r_prime)
        tags[redecide[absorb]] = TAG_ABSORBED
        tags[redecide[relabel]] = TAG_RELABELED
        labels[redecide[relabel]] = y_max[relabel]

    active = tags != TAG_DROPPED
    x = np.asarray(ds.embeddings[active], dtype=np.float64)
    y = labels[active]
    w, b, _ = _descend(x, y, ds.num_classes, cfg.probe, state.probe.weights, state.probe.bias)

    new_state = TrainState(
        epoch=state.epoch + 1,
        probe=LinearProbe(weights=w, bias=b),
        active_mask=active,
        active_labels=labels,
        tags=tags,
        history=list(state.history),
    )
    new_state.history.append(_stats(new_state, ds, holdout, holdout_labels))
    return new_state


def mixfix_run(
    ds,
    selected: SelectionResult,
    cfg: MixFixConfig,
    holdout=None,
    holdout_labels=None,
    predict_fn=None,
):
    """Run cfg.epochs epochs from a fresh state; returns the final state and,
    when a holdout matrix is given, the final probe's probability rows on it."""
    state = init_state(ds, selected, cfg)
    for _ in range(cfg.epochs):
        state = mixfix_epoch(state, ds, selected, cfg, predict_fn, holdout, holdout_labels)
    holdout_probs = predict_probe(state.probe, holdout) if holdout is not None else None
    return state, holdout_probs


def write_history(history: list[EpochStats], path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "n_train", "n_absorbed", "n_relabeled", "train_label_acc", "holdout_acc"])
        for row in history:
            writer.writerow(
                [
                    row.epoch,
                    row.n_train,
                    row.n_absorbed,
                    row.n_relabeled,
                    "" if row.train_label_acc is None else repr(row.train_label_acc),
                    "" if row.holdout_acc is None else repr(row.holdout_acc),
                ]
            )
