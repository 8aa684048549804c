"""Two-component 1-D Gaussian mixture fit by EM.

Component 0 is always the small-mean component. Initialization is
deterministic (10th/90th percentile means, equal weights, pooled variance),
so a fit is fully reproducible; the seed argument is kept for API stability
only. Values are sorted internally, which makes the fit invariant to input
order bit-for-bit.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

_LOG_2PI = math.log(2.0 * math.pi)


class DegenerateDataError(ValueError):
    """Fewer than two distinct values: there is nothing for EM to separate."""


@dataclass(frozen=True)
class Gmm1D:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    log_likelihood: np.ndarray

    def __post_init__(self):
        if self.means[0] > self.means[1]:
            raise ValueError("components must be ordered by mean")
        if not math.isclose(self.weights[0] + self.weights[1], 1.0, abs_tol=1e-9):
            raise ValueError("weights must sum to 1")


def fit_em(
    values,
    max_iters: int = 100,
    tol: float = 1e-6,
    variance_floor: float | None = None,
    seed: int = 0,
) -> Gmm1D:
    """EM until the relative log-likelihood improvement drops below tol or
    max_iters updates have run. The recorded trace holds the log-likelihood
    of the parameters after 0, 1, 2, ... updates.

    variance_floor defaults to 1e-6 * sample variance with an absolute floor
    of 1e-12; it stops components from collapsing onto duplicated values.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size < 2 or not np.all(np.isfinite(v)):
        raise DegenerateDataError(f"need >= 2 finite values, got {v.size}")
    vs = np.sort(v)
    if vs[0] == vs[-1]:
        raise DegenerateDataError("all values identical; a two-component fit is undefined")

    sample_var = float(np.var(vs))
    floor = max(1e-6 * sample_var, 1e-12) if variance_floor is None else max(float(variance_floor), 0.0)
    mu0, mu1 = np.percentile(vs, [10.0, 90.0])
    if mu0 == mu1:
        mu0, mu1 = float(vs[0]), float(vs[-1])
    var0 = max(sample_var, floor)

    w, mu, var, trace = _kernels.em_fit(vs, float(mu0), float(mu1), var0, var0, 0.5, int(max_iters), float(tol), floor)
    order = np.argsort(mu, kind="stable")
    return Gmm1D(
        weights=np.asarray(w)[order],
        means=np.asarray(mu)[order],
        variances=np.asarray(var)[order],
        log_likelihood=np.asarray(trace),
    )


def posterior_small(model: Gmm1D, values) -> np.ndarray:
    """Posterior probability that each value belongs to the small-mean
    component. Computed in log space, so far-tail inputs stay in [0, 1]."""
    v = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("posterior_small requires finite values")
    w = np.maximum(model.weights, 1e-300)
    la = np.log(w[0]) - 0.5 * (_LOG_2PI + np.log(model.variances[0]) + (v - model.means[0]) ** 2 / model.variances[0])
    lb = np.log(w[1]) - 0.5 * (_LOG_2PI + np.log(model.variances[1]) + (v - model.means[1]) ** 2 / model.variances[1])
    m = np.maximum(la, lb)
    ea = np.exp(la - m)
    eb = np.exp(lb - m)
    return ea / (ea + eb)
