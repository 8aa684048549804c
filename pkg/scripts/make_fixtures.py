#!/usr/bin/env python3
"""Regenerate the committed binary fixtures under tests/fixtures/.

The fixtures are committed rather than rebuilt at test time so that
acceptance thresholds cannot drift with RNG-stream changes across numpy
releases. Rerun this script only when the fixture design itself changes.
"""

from pathlib import Path

import numpy as np

from cleanselect import (
    NoiseSpec,
    NoisyDataset,
    SyntheticWorldSpec,
    generate_world,
    inject_noise,
    write_dataset,
)
from cleanselect.formats import save_labels, save_manifest
from cleanselect.zeroshot import PromptBank

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

WORLD_SEED = 20240801
NOISE_SEEDS = {0.2: 777, 0.5: 778, 0.8: 779}
IMBALANCED_SEED = 101
SMALL_SEED = 31


def build_world():
    out = FIXTURES / "world"
    spec = SyntheticWorldSpec(
        num_classes=3,
        dim=16,
        samples_per_class=1200,
        centroid_separation=6.0,
        cluster_sigma=1.0,
        prompts_per_class=4,
        prompt_jitter_sigma=0.25,
        seed=WORLD_SEED,
    )
    world = generate_world(spec)
    ds = world.dataset

    train_idx, hold_idx = [], []
    for c in range(3):
        idx = np.flatnonzero(ds.true_labels == c)
        train_idx.append(idx[:1000])
        hold_idx.append(idx[1000:])
    train_idx = np.concatenate(train_idx)
    hold_idx = np.concatenate(hold_idx)

    train = NoisyDataset(
        ds.embeddings[train_idx], ds.true_labels[train_idx].copy(), ds.true_labels[train_idx], 3, list(ds.class_names)
    )
    write_dataset(train, world.prompts, out)

    holdout = NoisyDataset(
        ds.embeddings[hold_idx], ds.true_labels[hold_idx].copy(), ds.true_labels[hold_idx], 3, list(ds.class_names)
    )
    write_dataset(holdout, None, out / "holdout")

    for ratio, seed in NOISE_SEEDS.items():
        noisy = inject_noise(train, NoiseSpec("symmetric", ratio, seed=seed))
        tag = f"sym{int(ratio * 100)}"
        save_labels(noisy.noisy_labels, out / f"labels_{tag}.lab1")
        manifest = {
            "embeddings": "embeddings.emb1",
            "labels": f"labels_{tag}.lab1",
            "true_labels": "true_labels.lab1",
            "num_classes": 3,
            "dim": 16,
            "prompts": [
                {"class": name, "path": f"prompts_{name}.emb1", "count": 4} for name in train.class_names
            ],
        }
        save_manifest(manifest, out / f"manifest_{tag}.json")
    print(f"world: {train.n} train / {holdout.n} holdout samples -> {out}")


def build_imbalanced():
    # class sizes 1000/500/100 with per-class spreads 0.5/1.0/2.2: the small
    # class is also the hardest, so its losses sit on a different scale and a
    # single global mixture under-selects it
    out = FIXTURES / "imbalanced"
    sizes = (1000, 500, 100)
    sigmas = (0.5, 1.0, 2.2)
    sep, d, j, jitter = 5.0, 16, 4, 0.2
    rng = np.random.default_rng(IMBALANCED_SEED)
    k = len(sizes)
    while True:
        raw = rng.normal(size=(k, d))
        cand = raw / np.linalg.norm(raw, axis=1, keepdims=True) * sep
        dist = np.linalg.norm(cand[:, None] - cand[None, :], axis=2)
        if dist[np.triu_indices(k, 1)].min() >= sep:
            break
    embs, labels = [], []
    for c, (n, s) in enumerate(zip(sizes, sigmas)):
        embs.append(cand[c] + rng.normal(size=(n, d)) * s)
        labels.append(np.full(n, c, dtype=np.int64))
    x = np.concatenate(embs).astype(np.float32)
    y = np.concatenate(labels)
    prompts = [(cand[c] + rng.normal(size=(j, d)) * jitter).astype(np.float32) for c in range(k)]
    names = [f"class_{i}" for i in range(k)]
    ds = NoisyDataset(x, y.copy(), y, k, names)
    bank = PromptBank(names, prompts)
    write_dataset(ds, bank, out)

    noisy = inject_noise(ds, NoiseSpec("symmetric", 0.3, seed=IMBALANCED_SEED + 7))
    save_labels(noisy.noisy_labels, out / "labels_sym30.lab1")
    manifest = {
        "embeddings": "embeddings.emb1",
        "labels": "labels_sym30.lab1",
        "true_labels": "true_labels.lab1",
        "num_classes": k,
        "dim": d,
        "prompts": [{"class": name, "path": f"prompts_{name}.emb1", "count": j} for name in names],
    }
    save_manifest(manifest, out / "manifest_sym30.json")
    print(f"imbalanced: {ds.n} samples -> {out}")


def build_small():
    # 300-sample world for fast end-to-end CLI runs
    out = FIXTURES / "small"
    spec = SyntheticWorldSpec(
        num_classes=3,
        dim=8,
        samples_per_class=100,
        centroid_separation=6.0,
        cluster_sigma=1.0,
        prompts_per_class=2,
        prompt_jitter_sigma=0.2,
        seed=SMALL_SEED,
    )
    world = generate_world(spec)
    write_dataset(world.dataset, world.prompts, out)
    print(f"small: {world.dataset.n} samples -> {out}")


if __name__ == "__main__":
    build_world()
    build_imbalanced()
    build_small()
