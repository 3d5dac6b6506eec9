"""Weak-value estimation through strong interactions on photonic qubits.

Three estimation regimes (weak coupling, insensitive pointer, quantum erasure)
built on one exact two-qubit simulator, a Jones-calculus model of the
linear-optical c-phase gate, seeded finite-statistics sampling and a
one-parameter effective-coupling fit.
"""
from importlib.metadata import PackageNotFoundError, version

from .analysis import (
    ComparisonReport,
    FitFailure,
    SweepResult,
    compare_regimes,
    default_grid,
    fit_effective_coupling,
    sweep,
)
from .protocols import (
    FeedForward,
    PointerStats,
    Regime,
    RegimeConfig,
    estimate_weak_value,
    run_regime,
)
from .weakval import PrePostSelection, cphase, theory_curve, weak_value

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source checkout
    __version__ = "0.1.0"

__all__ = [
    "ComparisonReport", "FeedForward", "FitFailure", "PointerStats", "PrePostSelection",
    "Regime", "RegimeConfig", "SweepResult", "compare_regimes", "cphase", "default_grid",
    "estimate_weak_value", "fit_effective_coupling", "run_regime", "sweep", "theory_curve",
    "weak_value",
]
