"""Dataset container, synthetic label noise, and synthetic embedding worlds."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import formats
from .zeroshot import PromptBank, l2_normalize

NOISE_KINDS = ("symmetric", "asymmetric", "instance")


class ValidationError(ValueError):
    """Raised when dataset pieces do not fit together."""


class GenerationError(RuntimeError):
    """Raised when a synthetic world cannot satisfy its separation target."""


@dataclass
class NoisyDataset:
    """Embeddings plus (possibly corrupted) labels; true labels are optional
    and only ever used for evaluation."""

    embeddings: np.ndarray
    noisy_labels: np.ndarray
    true_labels: np.ndarray | None
    num_classes: int
    class_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.embeddings = np.asarray(self.embeddings)
        self.noisy_labels = np.asarray(self.noisy_labels, dtype=np.int64)
        if self.true_labels is not None:
            self.true_labels = np.asarray(self.true_labels, dtype=np.int64)
        if self.embeddings.ndim != 2 or self.embeddings.shape[0] < 1 or self.embeddings.shape[1] < 1:
            raise ValidationError(f"embeddings must be a non-empty 2-D matrix, got {self.embeddings.shape}")
        if not np.all(np.isfinite(self.embeddings)):
            raise ValidationError("embeddings contain non-finite values")
        if self.num_classes < 2:
            raise ValidationError(f"num_classes must be >= 2, got {self.num_classes}")
        if not self.class_names:
            self.class_names = [f"class_{i}" for i in range(self.num_classes)]
        if len(self.class_names) != self.num_classes:
            raise ValidationError("class_names length does not match num_classes")
        for name, y in (("noisy_labels", self.noisy_labels), ("true_labels", self.true_labels)):
            if y is None:
                continue
            if y.shape != (self.embeddings.shape[0],):
                raise ValidationError(f"{name} length {y.shape} does not match embeddings rows {self.n}")
            if y.size and (y.min() < 0 or y.max() >= self.num_classes):
                raise ValidationError(f"{name} outside [0, {self.num_classes})")

    @property
    def n(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def with_noisy_labels(self, labels) -> "NoisyDataset":
        return NoisyDataset(self.embeddings, labels, self.true_labels, self.num_classes, list(self.class_names))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    ratio: float
    pair_map: dict[int, int] | None = None
    seed: int = 0
    include_original: bool = False

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValidationError(f"unknown noise kind {self.kind!r}, expected one of {NOISE_KINDS}")
        if not 0.0 <= self.ratio <= 1.0:
            raise ValidationError(f"noise ratio must be in [0, 1], got {self.ratio}")
        if self.kind == "asymmetric" and not self.pair_map:
            raise ValidationError("asymmetric noise requires a pair_map")


@dataclass(frozen=True)
class SyntheticWorldSpec:
    num_classes: int
    dim: int
    samples_per_class: int | Sequence[int]
    centroid_separation: float
    cluster_sigma: float
    prompts_per_class: int = 1
    prompt_jitter_sigma: float = 0.0
    seed: int = 0

    def counts(self) -> list[int]:
        if isinstance(self.samples_per_class, int):
            return [self.samples_per_class] * self.num_classes
        return list(self.samples_per_class)

    def __post_init__(self):
        if self.num_classes < 1 or self.dim < 1 or self.prompts_per_class < 1:
            raise ValidationError("counts in a world spec must be >= 1")
        counts = self.counts()
        if len(counts) != self.num_classes or any(c < 1 for c in counts):
            raise ValidationError("samples_per_class must supply a count >= 1 for every class")
        if self.cluster_sigma <= 0:
            raise ValidationError("cluster_sigma must be > 0")
        if self.prompt_jitter_sigma < 0:
            raise ValidationError("prompt_jitter_sigma must be >= 0")


def inject_noise(ds: NoisyDataset, spec: NoiseSpec, prompts: PromptBank | None = None) -> NoisyDataset:
    """Corrupt the dataset's labels starting from its true labels.

    symmetric   flip with probability ratio to a uniformly random *other*
                class (include_original widens the draw to all classes).
    asymmetric  flip with probability ratio to pair_map[true]; classes
                without an entry, or mapped to themselves, never flip.
    instance    flip with probability ratio to the non-true class whose
                prompt centroid is most cosine-similar to the sample.

    Embeddings and true labels are never modified; the result is
    deterministic for a given spec.seed.
    """
    if ds.true_labels is None:
        raise ValidationError("inject_noise needs true_labels on the dataset")
    rng = np.random.default_rng(spec.seed)
    n, k = ds.n, ds.num_classes
    truth = ds.true_labels
    flips = rng.random(n) < spec.ratio

    if spec.kind == "symmetric":
        if spec.include_original:
            targets = rng.integers(0, k, size=n)
        else:
            draw = rng.integers(0, k - 1, size=n)
            targets = np.where(draw >= truth, draw + 1, draw)
    elif spec.kind == "asymmetric":
        mapping = np.arange(k)
        for src, dst in spec.pair_map.items():
            if not (0 <= src < k and 0 <= dst < k):
                raise ValidationError(f"pair_map entry {src}->{dst} outside [0, {k})")
            mapping[src] = dst
        targets = mapping[truth]
    else:  # instance
        if prompts is None:
            raise ValidationError("instance noise needs a prompt bank for class centroids")
        cents = l2_normalize(prompts.centroids())
        sims = l2_normalize(ds.embeddings) @ cents.T
        sims[np.arange(n), truth] = -np.inf
        targets = np.argmax(sims, axis=1)

    noisy = np.where(flips & (targets != truth), targets, truth)
    return ds.with_noisy_labels(noisy)


@dataclass
class World:
    """A generated world plus the centroids it was built from (the centroids
    back oracle checks; they are not part of the dataset proper)."""

    dataset: NoisyDataset
    prompts: PromptBank
    centroids: np.ndarray


def generate_world(spec: SyntheticWorldSpec, max_retries: int = 64) -> World:
    rng = np.random.default_rng(spec.seed)
    k, d = spec.num_classes, spec.dim
    min_dist = spec.centroid_separation * spec.cluster_sigma
    radius = min_dist if min_dist > 0 else spec.cluster_sigma

    centroids = None
    for _ in range(max_retries):
        raw = rng.normal(size=(k, d))
        norms = np.linalg.norm(raw, axis=1, keepdims=True)
        if np.any(norms == 0):
            continue
        cand = raw / norms * radius
        diff = cand[:, None, :] - cand[None, :, :]
        dist = np.linalg.norm(diff, axis=2)
        if k == 1 or dist[np.triu_indices(k, 1)].min() >= min_dist:
            centroids = cand
            break
    if centroids is None:
        raise GenerationError(
            f"could not place {k} centroids with pairwise distance >= {min_dist} in {max_retries} tries"
        )

    counts = spec.counts()
    emb_parts, labels = [], []
    for c, count in enumerate(counts):
        emb_parts.append(centroids[c] + rng.normal(size=(count, d)) * spec.cluster_sigma)
        labels.append(np.full(count, c, dtype=np.int64))
    embeddings = np.concatenate(emb_parts).astype(np.float32)
    truth = np.concatenate(labels)

    prompt_arrays = [
        (centroids[c] + rng.normal(size=(spec.prompts_per_class, d)) * spec.prompt_jitter_sigma).astype(np.float32)
        for c in range(k)
    ]
    names = [f"class_{i}" for i in range(k)]
    bank = PromptBank(class_names=names, embeddings=prompt_arrays)
    ds = NoisyDataset(embeddings, truth.copy(), truth, k, names)
    return World(dataset=ds, prompts=bank, centroids=centroids)


def make_synthetic_world(spec: SyntheticWorldSpec) -> tuple[NoisyDataset, PromptBank]:
    world = generate_world(spec)
    return world.dataset, world.prompts


# ---------------------------------------------------------------------------
# Manifest assembly.
# ---------------------------------------------------------------------------


def write_dataset(ds: NoisyDataset, bank: PromptBank | None, out_dir, manifest_name: str = "manifest.json") -> Path:
    """Write all binary files plus the manifest into out_dir; returns the
    manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    formats.save_embeddings(ds.embeddings, out / "embeddings.emb1")
    formats.save_labels(ds.noisy_labels, out / "labels.lab1")
    manifest = {
        "embeddings": "embeddings.emb1",
        "labels": "labels.lab1",
        "num_classes": ds.num_classes,
        "dim": ds.dim,
        "prompts": [],
    }
    if ds.true_labels is not None:
        formats.save_labels(ds.true_labels, out / "true_labels.lab1")
        manifest["true_labels"] = "true_labels.lab1"
    if bank is not None:
        for name, emb in zip(bank.class_names, bank.embeddings):
            fname = f"prompts_{name}.emb1"
            formats.save_embeddings(emb, out / fname)
            manifest["prompts"].append({"class": name, "path": fname, "count": int(emb.shape[0])})
    path = out / manifest_name
    formats.save_manifest(manifest, path)
    return path


def load_dataset(manifest_path) -> tuple[NoisyDataset, PromptBank | None]:
    base = Path(manifest_path).parent
    manifest = formats.load_manifest(manifest_path)
    embeddings = formats.load_embeddings(base / manifest["embeddings"])
    labels = formats.load_labels(base / manifest["labels"])
    truth = None
    if manifest.get("true_labels"):
        truth = formats.load_labels(base / manifest["true_labels"])
    k = int(manifest["num_classes"])
    if embeddings.shape[1] != int(manifest["dim"]):
        raise ValidationError(
            f"manifest dim {manifest['dim']} does not match embeddings width {embeddings.shape[1]}"
        )
    bank = None
    names = None
    if manifest["prompts"]:
        names, arrays = [], []
        for entry in manifest["prompts"]:
            arr = formats.load_embeddings(base / entry["path"])
            if arr.shape[0] != int(entry["count"]):
                raise ValidationError(
                    f"prompt file {entry['path']} has {arr.shape[0]} rows, manifest says {entry['count']}"
                )
            names.append(str(entry["class"]))
            arrays.append(arr)
        if len(names) != k:
            raise ValidationError(f"manifest lists {len(names)} prompt classes for num_classes={k}")
        bank = PromptBank(class_names=names, embeddings=arrays)
    ds = NoisyDataset(embeddings, labels, truth, k, names or [])
    return ds, bank
