"""Coordinate-transform-guided Bayesian optimization on a synthetic
split-and-delay alignment testbed, with standard BO, trust-region BO and
bi-objective EHVI baselines and a reproducible benchmarking harness."""

__version__ = "0.1.0"

from .acquisition import AnnealingSchedule, ParetoFront, ehvi_2d, maximize_acquisition, ucb
from .objective import NormalizationBounds, ScalarizedObjective, scalarize
from .simulator import DriftModel, Simulator, SimulatorConfig
from .surrogate import FitConfig, GpSurrogate, KernelParams, fit
from .transform import KnobPair, PairedTransform, build_paired_transform, transform_bounds

__all__ = [
    "AnnealingSchedule",
    "DriftModel",
    "FitConfig",
    "GpSurrogate",
    "KernelParams",
    "KnobPair",
    "NormalizationBounds",
    "ParetoFront",
    "PairedTransform",
    "ScalarizedObjective",
    "Simulator",
    "SimulatorConfig",
    "build_paired_transform",
    "ehvi_2d",
    "fit",
    "maximize_acquisition",
    "scalarize",
    "transform_bounds",
    "ucb",
    "__version__",
]
