"""cleanselect: clean-sample selection over frozen embeddings for noisily
labeled datasets, plus an absorb/relabel semi-supervised training loop and a
synthetic-noise benchmark harness."""

from .bench import SweepSpec, emit_roc_points, run_sweep
from .corpus import (
    GenerationError,
    NoiseSpec,
    NoisyDataset,
    SyntheticWorldSpec,
    ValidationError,
    generate_world,
    inject_noise,
    load_dataset,
    make_synthetic_world,
    write_dataset,
)
from .formats import (
    FormatError,
    load_embeddings,
    load_labels,
    save_embeddings,
    save_labels,
)
from .gmm import DegenerateDataError, Gmm1D, fit_em, posterior_small
from .induced import (
    LinearProbe,
    ProbeConfig,
    fit_probe,
    knn_probabilities,
    predict_probe,
    probe_gradient,
)
from .mixfix import MixFixConfig, TrainState, mixfix_decide, mixfix_epoch, mixfix_run
from .selection import (
    SelectionQuality,
    SelectionResult,
    consistency_select,
    intersect,
    loss_select,
    rank_auc,
    selection_quality,
)
from .zeroshot import PromptBank, l2_normalize, single_prompt_probabilities, zeroshot_probabilities

__version__ = "0.1.0"

__all__ = [
    "DegenerateDataError",
    "FormatError",
    "GenerationError",
    "Gmm1D",
    "LinearProbe",
    "MixFixConfig",
    "NoiseSpec",
    "NoisyDataset",
    "ProbeConfig",
    "PromptBank",
    "SelectionQuality",
    "SelectionResult",
    "SweepSpec",
    "SyntheticWorldSpec",
    "TrainState",
    "ValidationError",
    "consistency_select",
    "emit_roc_points",
    "fit_em",
    "fit_probe",
    "generate_world",
    "inject_noise",
    "intersect",
    "knn_probabilities",
    "l2_normalize",
    "load_dataset",
    "load_embeddings",
    "load_labels",
    "loss_select",
    "make_synthetic_world",
    "mixfix_decide",
    "mixfix_epoch",
    "mixfix_run",
    "posterior_small",
    "predict_probe",
    "probe_gradient",
    "rank_auc",
    "run_sweep",
    "save_embeddings",
    "save_labels",
    "selection_quality",
    "single_prompt_probabilities",
    "write_dataset",
    "zeroshot_probabilities",
]
