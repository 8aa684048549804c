"""Independent reference implementations used to pin expected test values.

Everything here is deliberately brute-force and shares no code with the
library paths it checks.
"""

import numpy as np


def pairwise_auc(scores, positives) -> float:
    """AUC by enumerating every (positive, negative) pair; ties count 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    pos = scores[positives]
    neg = scores[~positives]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def central_difference_gradient(objective, w, b, h=1e-5):
    """Central finite differences of objective(w, b) in every coordinate."""
    gw = np.zeros_like(w)
    for idx in np.ndindex(w.shape):
        wp, wm = w.copy(), w.copy()
        wp[idx] += h
        wm[idx] -= h
        gw[idx] = (objective(wp, b) - objective(wm, b)) / (2 * h)
    gb = np.zeros_like(b)
    for i in range(b.shape[0]):
        bp, bm = b.copy(), b.copy()
        bp[i] += h
        bm[i] -= h
        gb[i] = (objective(w, bp) - objective(w, bm)) / (2 * h)
    return gw, gb


def nearest_centroid_accuracy(embeddings, labels, centroids) -> float:
    """Bayes-optimal classification for equal-weight isotropic clusters."""
    x = np.asarray(embeddings, dtype=np.float64)
    d = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return float(np.mean(d.argmin(axis=1) == labels))


def knn_histogram_excluding_self(labels, num_classes, i):
    """Label histogram over every sample except i, normalized by n-1."""
    counts = np.bincount(labels, minlength=num_classes).astype(np.float64)
    counts[labels[i]] -= 1
    return counts / (len(labels) - 1)


def separating_hyperplane_holds(x, y, normal, offset) -> bool:
    """Check the given hyperplane strictly separates classes 0 and 1."""
    side = x @ normal + offset
    return bool(np.all(side[y == 0] < 0) and np.all(side[y == 1] > 0))
