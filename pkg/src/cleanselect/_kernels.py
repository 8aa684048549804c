"""Hot numeric kernels, each in two flavours: a numba @njit build and a pure
numpy build. The public names (`em_fit`, `knn_counts`) dispatch on the
CLEANSELECT_NUMBA flag; both flavours stay importable for benchmarking.
"""

import math

import numpy as np

from . import _accel

_LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Two-component 1-D Gaussian mixture EM.
#
# Protocol shared by both builds: values arrive pre-sorted (order-invariant
# fits), the trace holds the log-likelihood of the parameters before each
# update, and iteration stops once the relative improvement drops below tol.
# Variances never go below var_floor.
# ---------------------------------------------------------------------------


def em_fit_numpy(values, mu0, mu1, var0, var1, w0, max_iters, tol, var_floor):
    v = values
    n = v.shape[0]
    w = np.array([w0, 1.0 - w0])
    mu = np.array([mu0, mu1])
    var = np.array([var0, var1])
    trace = np.empty(max_iters + 1)
    n_trace = 0
    for it in range(max_iters + 1):
        la = np.log(w[0]) - 0.5 * (_LOG_2PI + np.log(var[0]) + (v - mu[0]) ** 2 / var[0])
        lb = np.log(w[1]) - 0.5 * (_LOG_2PI + np.log(var[1]) + (v - mu[1]) ** 2 / var[1])
        m = np.maximum(la, lb)
        ea = np.exp(la - m)
        eb = np.exp(lb - m)
        s = ea + eb
        ll = float(np.sum(m + np.log(s)))
        trace[it] = ll
        n_trace = it + 1
        if it > 0:
            denom = abs(trace[it - 1])
            if denom < 1e-300:
                denom = 1.0
            if (ll - trace[it - 1]) < tol * denom:
                break
        if it == max_iters:
            break
        r0 = ea / s
        s0 = float(np.sum(r0))
        s1 = n - s0
        s0c = s0 if s0 > 1e-300 else 1e-300
        s1c = s1 if s1 > 1e-300 else 1e-300
        new_mu0 = float(np.dot(r0, v)) / s0c
        new_mu1 = float(np.dot(1.0 - r0, v)) / s1c
        new_var0 = float(np.dot(r0, (v - new_mu0) ** 2)) / s0c
        new_var1 = float(np.dot(1.0 - r0, (v - new_mu1) ** 2)) / s1c
        w = np.array([s0 / n, s1 / n])
        mu = np.array([new_mu0, new_mu1])
        var = np.array([max(new_var0, var_floor), max(new_var1, var_floor)])
    return w, mu, var, trace[:n_trace].copy()


# ---------------------------------------------------------------------------
# kNN neighbour voting.
#
# sims is a full similarity matrix with the diagonal pre-masked (set below
# any attainable similarity). Ties break toward the lower sample index in
# both builds.
# ---------------------------------------------------------------------------


def knn_counts_numpy(sims, labels, k, num_classes):
    n = sims.shape[0]
    # stable sort on -sims keeps the original (index) order inside tie groups
    order = np.argsort(-sims, axis=1, kind="stable")[:, :k]
    neigh = labels[order]
    flat = neigh + np.arange(n)[:, None] * num_classes
    return np.bincount(flat.ravel(), minlength=n * num_classes).reshape(n, num_classes)


if _accel.HAVE_NUMBA:
    from numba import njit, prange

    @njit(cache=True)
    def em_fit_jit(values, mu0, mu1, var0, var1, w0, max_iters, tol, var_floor):  # pragma: no cover - exercised via dispatch
        v = values
        n = v.shape[0]
        w = np.array([w0, 1.0 - w0])
        mu = np.array([mu0, mu1])
        var = np.array([var0, var1])
        trace = np.empty(max_iters + 1)
        r0 = np.empty(n)
        n_trace = 0
        for it in range(max_iters + 1):
            lw0 = math.log(w[0])
            lw1 = math.log(w[1])
            lv0 = math.log(var[0])
            lv1 = math.log(var[1])
            ll = 0.0
            for i in range(n):
                d0 = v[i] - mu[0]
                d1 = v[i] - mu[1]
                la = lw0 - 0.5 * (_LOG_2PI + lv0 + d0 * d0 / var[0])
                lb = lw1 - 0.5 * (_LOG_2PI + lv1 + d1 * d1 / var[1])
                m = la if la > lb else lb
                ea = math.exp(la - m)
                eb = math.exp(lb - m)
                s = ea + eb
                ll += m + math.log(s)
                r0[i] = ea / s
            trace[it] = ll
            n_trace = it + 1
            if it > 0:
                denom = abs(trace[it - 1])
                if denom < 1e-300:
                    denom = 1.0
                if (ll - trace[it - 1]) < tol * denom:
                    break
            if it == max_iters:
                break
            s0 = 0.0
            sv0 = 0.0
            sv1 = 0.0
            for i in range(n):
                s0 += r0[i]
                sv0 += r0[i] * v[i]
                sv1 += (1.0 - r0[i]) * v[i]
            s1 = n - s0
            s0c = s0 if s0 > 1e-300 else 1e-300
            s1c = s1 if s1 > 1e-300 else 1e-300
            new_mu0 = sv0 / s0c
            new_mu1 = sv1 / s1c
            sq0 = 0.0
            sq1 = 0.0
            for i in range(n):
                d0 = v[i] - new_mu0
                d1 = v[i] - new_mu1
                sq0 += r0[i] * d0 * d0
                sq1 += (1.0 - r0[i]) * d1 * d1
            new_var0 = sq0 / s0c
            new_var1 = sq1 / s1c
            w = np.array([s0 / n, s1 / n])
            mu = np.array([new_mu0, new_mu1])
            var = np.array(
                [
                    new_var0 if new_var0 > var_floor else var_floor,
                    new_var1 if new_var1 > var_floor else var_floor,
                ]
            )
        return w, mu, var, trace[:n_trace].copy()

    @njit(cache=True, parallel=True)
    def knn_counts_jit(sims, labels, k, num_classes):  # pragma: no cover - exercised via dispatch
        n = sims.shape[0]
        counts = np.zeros((n, num_classes), np.int64)
        for i in prange(n):
            taken = np.zeros(n, np.bool_)
            for _ in range(k):
                best = -1e300
                best_j = -1
                for j in range(n):
                    if not taken[j] and sims[i, j] > best:
                        best = sims[i, j]
                        best_j = j
                taken[best_j] = True
                counts[i, labels[best_j]] += 1
        return counts

else:  # pragma: no cover - numba always present in CI
    em_fit_jit = None
    knn_counts_jit = None


def em_fit(values, mu0, mu1, var0, var1, w0, max_iters, tol, var_floor):
    if _accel.USE_NUMBA:
        return em_fit_jit(values, mu0, mu1, var0, var1, w0, max_iters, tol, var_floor)
    return em_fit_numpy(values, mu0, mu1, var0, var1, w0, max_iters, tol, var_floor)


def knn_counts(sims, labels, k, num_classes):
    if _accel.USE_NUMBA:
        return knn_counts_jit(sims, np.ascontiguousarray(labels), k, num_classes)
    return knn_counts_numpy(sims, labels, k, num_classes)


def warmup():
    """Trigger JIT compilation so timed code paths never pay compile cost."""
    if not _accel.USE_NUMBA:
        return
    v = np.sort(np.array([0.0, 0.5, 1.0, 5.0, 5.5, 6.0]))
    em_fit(v, 0.5, 5.5, 1.0, 1.0, 0.5, 5, 1e-6, 1e-12)
    sims = np.full((3, 3), -2.0)
    sims[0, 1] = sims[1, 0] = 0.5
    sims[0, 2] = sims[2, 0] = 0.1
    sims[1, 2] = sims[2, 1] = 0.2
    knn_counts(sims, np.array([0, 1, 1], np.int64), 1, 2)
