"""Asymptotic risk of principal component regression under Gaussian design."""

from .densities import DensitySpec, InversePoly, Pareto, Uniform
from .estimator import OraclePCR
from .exceptions import (
    BracketError,
    ConvergenceError,
    DegenerateDesignError,
    DomainError,
    PCRRiskError,
    SolverError,
)
from .generalrisk import GeneralModel
from .numkernel import Tolerance
from .pcrsim import RiskEstimate, SimConfig
from .polyrisk import FixedPoint, PolyModel, Regime, RiskPoint

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ConvergenceError",
    "DegenerateDesignError",
    "DensitySpec",
    "DomainError",
    "FixedPoint",
    "GeneralModel",
    "InversePoly",
    "OraclePCR",
    "PCRRiskError",
    "Pareto",
    "PolyModel",
    "Regime",
    "RiskEstimate",
    "RiskPoint",
    "SimConfig",
    "SolverError",
    "Tolerance",
    "Uniform",
]
