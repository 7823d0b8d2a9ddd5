"""Operator size distributions in Brownian SYK-type open quantum systems.

Exact finite-N master equations for the size distribution, their large-N
closed forms, the scramblon continuum, the spectral gap of the generator, and
an independent spin-representation cross-check.
"""

from .errors import (
    IntegrationError,
    NumericalError,
    OpSizeError,
    PhaseError,
    ResourceError,
    SpecError,
)
from .generator import Generator, apply, assemble, column_sums, to_dense
from .model import (
    ModelKind,
    ModelSpec,
    SizeDefinition,
    coefficient,
    critical_ratio,
    initial_slope,
)
from .propagate import Trajectory, evolve_expm, evolve_ode, moments
from .spectral import fit_log_gap, gap_sweep, spectral_report

__version__ = "0.1.0"

__all__ = [
    "Generator",
    "IntegrationError",
    "ModelKind",
    "ModelSpec",
    "NumericalError",
    "OpSizeError",
    "PhaseError",
    "ResourceError",
    "SizeDefinition",
    "SpecError",
    "Trajectory",
    "apply",
    "assemble",
    "coefficient",
    "column_sums",
    "critical_ratio",
    "evolve_expm",
    "evolve_ode",
    "fit_log_gap",
    "gap_sweep",
    "initial_slope",
    "moments",
    "spectral_report",
    "to_dense",
]
