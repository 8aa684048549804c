"""Named threshold presets for common benchmark datasets.

The consistency selector's natural default is 1.0 (select only argmax
agreement); the dataset presets instead carry the looser operating points
that work well in practice. `consistency-strict` keeps the 1.0 variant
available by name.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Preset:
    theta_consistency: float
    theta_loss: float
    theta_r: float
    theta_r_prime: float
    pair_map: dict[int, int] | None = None


# CIFAR-10 class order: 0 airplane, 1 automobile, 2 bird, 3 cat, 4 deer,
# 5 dog, 6 frog, 7 horse, 8 ship, 9 truck. Confusable-pair flips:
# truck->automobile, bird->airplane, deer->horse, cat<->dog.
CIFAR10_ASYM_PAIR_MAP = {9: 1, 2: 0, 4: 7, 3: 5, 5: 3}

PRESETS: dict[str, Preset] = {
    "default": Preset(0.8, 0.5, 0.7, 0.8),
    "consistency-strict": Preset(1.0, 0.5, 0.7, 0.8),
    "cifar10-sym": Preset(0.8, 0.5, 0.8, 0.9),
    "cifar10-asym": Preset(0.8, 0.5, 0.8, 0.9, pair_map=CIFAR10_ASYM_PAIR_MAP),
    "cifar100-sym": Preset(0.8, 0.5, 0.7, 0.8),
    "red-mini-imagenet": Preset(0.8, 0.5, 0.8, 0.95),
    "webvision": Preset(1.0, 0.5, 0.7, 1.0),
    "clothing1m": Preset(0.5, 0.0, 0.7, 1.0),
    "animal10n": Preset(0.8, 0.5, 0.7, 0.99),
}


def resolve(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None
