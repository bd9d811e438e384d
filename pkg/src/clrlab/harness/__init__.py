"""Experiment harness: seeded generators, orchestration, reports, CLI."""

from .generators import (
    POTENTIAL_STYLES,
    generate_potential,
    random_admissible_function,
    random_hermitian,
    random_psd,
    rng_from,
)
from .reports import EXPERIMENT_NAMES, ExperimentConfig, ExperimentReport, derive_seed
from .experiments import EXPERIMENTS, run_experiment

__all__ = [
    "EXPERIMENTS",
    "EXPERIMENT_NAMES",
    "POTENTIAL_STYLES",
    "ExperimentConfig",
    "ExperimentReport",
    "derive_seed",
    "generate_potential",
    "random_admissible_function",
    "random_hermitian",
    "random_psd",
    "rng_from",
    "run_experiment",
]
