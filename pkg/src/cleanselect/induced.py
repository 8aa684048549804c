"""Classifiers induced from frozen embeddings and noisy labels: a multinomial
logistic probe trained by full-batch descent, and a kNN probability
estimator. Unlike the zero-shot path, both are label-dependent by design.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .zeroshot import l2_normalize

_MAX_HALVINGS = 60


class ProbeError(ValueError):
    pass


@dataclass(frozen=True)
class ProbeConfig:
    l2_lambda: float = 1e-4
    learning_rate: float = 1.0
    iterations: int = 300
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.l2_lambda < 0:
            raise ProbeError(f"l2_lambda must be >= 0, got {self.l2_lambda}")
        if self.iterations < 1:
            raise ProbeError(f"iterations must be >= 1, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ProbeError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass
class LinearProbe:
    weights: np.ndarray  # K x d
    bias: np.ndarray  # K
    loss_trace: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ProbeError(f"inconsistent probe shapes: weights {self.weights.shape}, bias {self.bias.shape}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ProbeError("probe parameters must be finite")

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _objective(x, y, w, b, l2):
    logits = x @ w.T + b
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    ce = float(np.mean(lse - shifted[np.arange(x.shape[0]), y]))
    return ce + 0.5 * l2 * float(np.sum(w * w))


def _gradient(x, y, w, b, l2):
    n = x.shape[0]
    p = _softmax(x @ w.T + b)
    p[np.arange(n), y] -= 1.0
    gw = p.T @ x / n + l2 * w
    gb = p.mean(axis=0)
    return gw, gb


def _descend(x, y, k, cfg: ProbeConfig, w0=None, b0=None):
    """Full-batch descent with monotone line control: a step that raises the
    loss is retried at half the rate, an accepted step nudges the rate back
    up. The recorded trace is therefore non-increasing."""
    w = np.zeros((k, x.shape[1])) if w0 is None else np.array(w0, dtype=np.float64)
    b = np.zeros(k) if b0 is None else np.array(b0, dtype=np.float64)
    lr = cfg.learning_rate
    loss = _objective(x, y, w, b, cfg.l2_lambda)
    trace = [loss]
    for _ in range(cfg.iterations):
        gw, gb = _gradient(x, y, w, b, cfg.l2_lambda)
        accepted = False
        for _ in range(_MAX_HALVINGS):
            cand_w = w - lr * gw
            cand_b = b - lr * gb
            cand_loss = _objective(x, y, cand_w, cand_b, cfg.l2_lambda)
            if cand_loss <= loss:
                accepted = True
                break
            lr *= 0.5
        if not accepted:
            break
        w, b = cand_w, cand_b
        improvement = loss - cand_loss
        loss = cand_loss
        trace.append(loss)
        lr *= 1.25
        if improvement <= cfg.tolerance * max(abs(loss), 1e-12):
            break
    return w, b, np.asarray(trace)


def fit_probe(ds, cfg: ProbeConfig = ProbeConfig(), allow_missing: bool = False) -> LinearProbe:
    """Minimize mean cross-entropy + (l2_lambda/2)*||W||^2 from zero-initialized
    parameters. Every class must appear in the data unless allow_missing."""
    x = np.asarray(ds.embeddings, dtype=np.float64)
    y = ds.noisy_labels
    counts = np.bincount(y, minlength=ds.num_classes)
    if not allow_missing and np.any(counts == 0):
        missing = np.flatnonzero(counts == 0).tolist()
        raise ProbeError(f"classes {missing} absent from the dataset; pass allow_missing=True to permit")
    w, b, trace = _descend(x, y, ds.num_classes, cfg)
    return LinearProbe(weights=w, bias=b, loss_trace=trace)


def probe_gradient(ds, probe: LinearProbe, cfg: ProbeConfig = ProbeConfig()):
    """Exact analytic gradient of the fit_probe objective at the probe's
    current parameters; returns (grad_weights, grad_bias)."""
    if probe.dim != ds.dim or probe.num_classes != ds.num_classes:
        raise ProbeError(
            f"probe shape ({probe.num_classes}, {probe.dim}) does not match dataset ({ds.num_classes}, {ds.dim})"
        )
    x = np.asarray(ds.embeddings, dtype=np.float64)
    return _gradient(x, ds.noisy_labels, probe.weights, probe.bias, cfg.l2_lambda)


def predict_probe(probe: LinearProbe, images) -> np.ndarray:
    x = np.asarray(images, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != probe.dim:
        raise ProbeError(f"images shape {x.shape} does not match probe dim {probe.dim}")
    return _softmax(x @ probe.weights.T + probe.bias)


def default_k(ds) -> int:
    counts = np.bincount(ds.noisy_labels, minlength=ds.num_classes)
    smallest = int(counts[counts > 0].min())
    return max(1, min(50, smallest))


def knn_probabilities(ds, k: int | None = None, metric: str = "cosine") -> np.ndarray:
    """Neighbor-vote probabilities: P(c) = (neighbors of noisy label c) / k
    over the k most cosine-similar *other* samples. Similarity ties break
    toward the lower sample index, so the result is deterministic.
    """
    if metric != "cosine":
        raise ProbeError(f"unsupported metric {metric!r}; only 'cosine' is implemented")
    if k is None:
        k = default_k(ds)
    if k < 1 or k >= ds.n:
        raise ProbeError(f"k must satisfy 1 <= k < {ds.n}, got {k}")
    xn = l2_normalize(ds.embeddings)
    sims = xn @ xn.T
    # mask self-similarity below any attainable cosine so it is never picked
    np.fill_diagonal(sims, -2.0)
    counts = _kernels.knn_counts(sims, ds.noisy_labels, int(k), ds.num_classes)
    return counts / float(k)
