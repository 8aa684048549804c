"""Zero-shot class probabilities from image embeddings and a prompt bank.

A sample's raw score for class k aggregates exp(temperature * <x, p>) over
that class's prompts; normalizing the scores across classes gives a
probability row. Labels never enter the computation, so corrupting them
cannot change the output.
"""

from dataclasses import dataclass

import numpy as np


class ZeroShotError(ValueError):
    pass


@dataclass
class PromptBank:
    """Per-class prompt embeddings. Classes may hold different numbers of
    prompts; all prompts share one dimension."""

    class_names: list[str]
    embeddings: list[np.ndarray]

    def __post_init__(self):
        if not self.embeddings:
            raise ZeroShotError("prompt bank must cover at least one class")
        if len(self.class_names) != len(self.embeddings):
            raise ZeroShotError("class_names and embeddings lengths differ")
        self.embeddings = [np.asarray(e) for e in self.embeddings]
        dims = set()
        for name, e in zip(self.class_names, self.embeddings):
            if e.ndim != 2 or e.shape[0] < 1:
                raise ZeroShotError(f"class {name!r} needs at least one prompt row, got shape {e.shape}")
            if not np.all(np.isfinite(e)):
                raise ZeroShotError(f"class {name!r} has non-finite prompt values")
            dims.add(e.shape[1])
        if len(dims) != 1:
            raise ZeroShotError(f"prompt dimensions differ across classes: {sorted(dims)}")

    @property
    def num_classes(self) -> int:
        return len(self.embeddings)

    @property
    def dim(self) -> int:
        return self.embeddings[0].shape[1]

    @property
    def counts(self) -> list[int]:
        return [e.shape[0] for e in self.embeddings]

    def centroids(self) -> np.ndarray:
        """K x d matrix of per-class mean prompt embeddings."""
        return np.stack([e.astype(np.float64).mean(axis=0) for e in self.embeddings])

    def stacked(self) -> tuple[np.ndarray, list[int]]:
        """All prompts stacked (float64) plus the start offset of each class."""
        offsets, total = [], 0
        for e in self.embeddings:
            offsets.append(total)
            total += e.shape[0]
        return np.concatenate([e.astype(np.float64) for e in self.embeddings]), offsets


def l2_normalize(matrix) -> np.ndarray:
    """Scale every row to unit Euclidean norm (computed in float64)."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ZeroShotError(f"expected a 2-D matrix, got shape {m.shape}")
    norms = np.linalg.norm(m, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise ZeroShotError(f"cannot normalize zero row at index {bad[0]}")
    return m / norms[:, None]


def zeroshot_probabilities(
    images,
    bank: PromptBank,
    temperature: float = 100.0,
    aggregation: str = "mean",
) -> np.ndarray:
    """N x K probability rows from cosine scores against the prompt bank.

    aggregation "mean" averages the per-prompt exponentials inside a class
    (robust to classes having unequal prompt counts); "sum" adds them.
    Rows are exactly invariant to prompt order: the exponentials are sorted
    before accumulation.
    """
    if temperature <= 0:
        raise ZeroShotError(f"temperature must be > 0, got {temperature}")
    if aggregation not in ("mean", "sum"):
        raise ZeroShotError(f"aggregation must be 'mean' or 'sum', got {aggregation!r}")
    x = np.asarray(images, dtype=np.float64)
    if x.ndim != 2:
        raise ZeroShotError(f"images must be 2-D, got shape {x.shape}")
    if x.shape[1] != bank.dim:
        raise ZeroShotError(f"image dim {x.shape[1]} does not match prompt dim {bank.dim}")

    prompts, offsets = bank.stacked()
    sims = x @ prompts.T
    # shift by the row max before exp; the common factor cancels in the ratio
    shifted = temperature * (sims - sims.max(axis=1, keepdims=True))
    expd = np.exp(shifted)

    scores = np.empty((x.shape[0], bank.num_classes))
    for c, (off, count) in enumerate(zip(offsets, bank.counts)):
        block = np.sort(expd[:, off : off + count], axis=1)
        agg = block.sum(axis=1)
        if aggregation == "mean":
            agg = agg / count
        scores[:, c] = agg
    return scores / scores.sum(axis=1, keepdims=True)


def single_prompt_probabilities(images, bank: PromptBank, temperature: float = 100.0) -> np.ndarray:
    """The one-prompt-per-class special case."""
    bad = [name for name, c in zip(bank.class_names, bank.counts) if c != 1]
    if bad:
        raise ZeroShotError(f"single-prompt scoring requires exactly one prompt per class; offending: {bad}")
    return zeroshot_probabilities(images, bank, temperature=temperature, aggregation="mean")
