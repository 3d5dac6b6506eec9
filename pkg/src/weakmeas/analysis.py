"""Gamma sweeps, effective-coupling fits and three-regime comparisons."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .montecarlo import MeasurementRecord, derive_seed, sample_record
from .protocols import (
    FeedForward,
    PointerStats,
    Regime,
    RegimeConfig,
    estimate_weak_value,
    invert,
    run_regime,
)
from .weakval import A_GATE, DivergentPostSelection, theory_curve, weak_value

MIN_FIT_POSTSELECT = 1e-4
FIT_BRACKET = (1e-6, 2.0)
FIT_RTOL = 1e-10
INVPHI = (math.sqrt(5) - 1) / 2

EXPERIMENT_COUPLINGS = {
    Regime.WEAK: 0.18 * math.pi,
    Regime.INSENSITIVE: 0.21,
    Regime.ERASURE: 0.08,
}


class FitFailure(RuntimeError):
    pass


def default_grid(n: int = 13, lo: float = 0.0, hi: float = 0.7 * math.pi) -> np.ndarray:
    return np.linspace(lo, hi, n)


def golden_section(f, lo: float, hi: float, rtol: float = FIT_RTOL, max_iter: int = 500):
    """Minimize a unimodal ``f`` on [lo, hi]. Returns (argmin, f(argmin))."""
    if not lo < hi:
        raise FitFailure(f"empty bracket [{lo}, {hi}]")
    a, b = lo, hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if not (math.isfinite(fc) and math.isfinite(fd)):
            raise FitFailure("non-finite objective")
        if b - a <= rtol * (abs(a) + abs(b)) / 2:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


@dataclass(frozen=True)
class FitResult:
    coupling: float
    residual: float


def fit_objective(gammas, raw, regime: Regime | str, targets=None):
    gammas = np.asarray(gammas, dtype=float)
    raw = np.asarray(raw, dtype=float)
    if targets is None:
        targets = np.array([theory_curve(g) for g in gammas])

    def objective(c: float) -> float:
        return float(np.sum((invert(regime, raw, c) - targets) ** 2))

    return objective


def fit_effective_coupling(points: Sequence[tuple[float, float]], regime: Regime | str,
                           bracket: tuple[float, float] = FIT_BRACKET,
                           targets: Sequence[float] | None = None) -> FitResult:
    """Least-squares coupling such that inverted pointer data track the theory curve.

    Unweighted; ``residual`` is the RMS deviation at the optimum.
    """
    pts = [(float(g), float(r)) for g, r in points if math.isfinite(r)]
    if len(pts) < 3:
        raise FitFailure(f"need at least 3 valid points, got {len(pts)}")
    gammas, raw = zip(*pts)
    objective = fit_objective(gammas, raw, regime, targets)
    c, value = golden_section(objective, *bracket)
    return FitResult(c, math.sqrt(value / len(pts)))


@dataclass
class SweepResult:
    regime: Regime
    gamma_grid: np.ndarray
    exact_aw: np.ndarray
    estimated_aw: np.ndarray
    stderr: np.ndarray
    raw: np.ndarray
    raw_stderr: np.ndarray
    p_postselect: np.ndarray
    system_fidelity: np.ndarray
    valid: np.ndarray
    in_fit: np.ndarray
    fitted_coupling: float
    fit_residual: float
    nominal_coupling: float
    shots: int = 0
    master_seed: int | None = None
    records: list[MeasurementRecord] | None = None

    @property
    def sampled(self) -> bool:
        return self.shots > 0

    def deviation(self) -> np.ndarray:
        return self.estimated_aw - self.exact_aw


def _exact_aw(config: RegimeConfig) -> float:
    try:
        return float(np.real(weak_value(A_GATE, config.sel)))
    except DivergentPostSelection:
        return math.nan


def sweep(config: RegimeConfig, gamma_grid: Sequence[float], shots: int | None = None,
          master_seed: int | None = None) -> SweepResult:
    """Run ``config`` over ``gamma_grid``, fit the effective coupling, invert.

    ``shots`` of None or 0 gives exact (infinite statistics) expectations; any
    positive value samples that many emitted pairs per point.
    """
    grid = np.asarray(gamma_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("gamma grid must be strictly increasing")
    shots = int(shots or 0)
    if shots and master_seed is None:
        raise ValueError("sampled sweeps need a master seed")

    exact_stats: list[PointerStats] = []
    used: list[PointerStats] = []
    records = [] if shots else None
    for i, g in enumerate(grid):
        cfg = config.at(g)
        st = run_regime(cfg)
        exact_stats.append(st)
        if shots:
            rec = sample_record(st.outcome_probs, shots, derive_seed(master_seed, i))
            records.append(rec)
            emp = rec.derived_stats
            used.append(PointerStats(
                p_postselect=emp.p_postselect, exp_x=emp.exp_x, exp_y=emp.exp_y,
                exp_z=emp.exp_z, system_fidelity=st.system_fidelity,
                outcome_probs=emp.outcome_probs, measured=st.measured,
                valid=st.valid and emp.valid, stderr=emp.stderr))
        else:
            used.append(st)

    valid = np.array([s.valid and math.isfinite(s.raw) for s in used])
    p_post = np.array([s.p_postselect for s in used])
    raw = np.array([s.raw for s in used])
    raw_se = np.array([s.raw_stderr for s in used])
    in_fit = valid & (p_post >= MIN_FIT_POSTSELECT)
    fit = fit_effective_coupling(list(zip(grid[in_fit], raw[in_fit])), config.regime)

    est = np.full(grid.shape, math.nan)
    se = np.full(grid.shape, math.nan)
    for i, s in enumerate(used):
        if valid[i]:
            e = estimate_weak_value(s, config.at(grid[i]), fit.coupling)
            est[i] = e.value.real
            se[i] = e.stderr

    return SweepResult(
        regime=config.regime,
        gamma_grid=grid,
        exact_aw=np.array([_exact_aw(config.at(g)) for g in grid]),
        estimated_aw=est,
        stderr=se,
        raw=raw,
        raw_stderr=raw_se,
        p_postselect=p_post,
        system_fidelity=np.array([s.system_fidelity for s in exact_stats]),
        valid=valid,
        in_fit=in_fit,
        fitted_coupling=fit.coupling,
        fit_residual=fit.residual,
        nominal_coupling=config.coupling.value,
        shots=shots,
        master_seed=master_seed,
        records=records,
    )


@dataclass
class ComparisonReport:
    sweeps: dict[Regime, SweepResult]
    pairwise_max_delta: dict[tuple[Regime, Regime], float]
    consistent_fraction: float
    consistent: bool
    exact_tolerance: float = field(default=0.02)

    @property
    def gamma_grid(self) -> np.ndarray:
        return next(iter(self.sweeps.values())).gamma_grid


def compare_regimes(gamma_grid: Sequence[float] | None = None,
                    couplings: Mapping[Regime | str, float] | None = None,
                    shots: int | None = None, master_seed: int | None = None,
                    feedforward: FeedForward | str = FeedForward.TRUE_OPERATOR,
                    exact_tolerance: float = 0.02,
                    required_fraction: float = 0.95) -> ComparisonReport:
    """Sweep all three regimes on one grid and check pairwise agreement.

    A pair agrees at a point when |difference| <= 3 combined standard errors
    (sampled mode) or <= ``exact_tolerance`` (exact mode). The report is
    consistent when every pair agrees on at least ``required_fraction`` of the
    points valid in both sweeps.
    """
    grid = default_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    cpl = {Regime(k): v for k, v in (couplings or EXPERIMENT_COUPLINGS).items()}
    if set(cpl) != set(Regime):
        raise ValueError("couplings must be given for all three regimes")

    sweeps = {}
    for k, regime in enumerate(Regime):
        seed = None if master_seed is None else derive_seed(master_seed, 1 << 32 | k)
        cfg = RegimeConfig.create(regime, cpl[regime], feedforward=feedforward)
        sweeps[regime] = sweep(cfg, grid, shots, seed)

    deltas = {}
    fractions = []
    regimes = list(Regime)
    for i in range(3):
        for j in range(i + 1, 3):
            a, b = sweeps[regimes[i]], sweeps[regimes[j]]
            both = a.valid & b.valid
            d = np.abs(a.estimated_aw - b.estimated_aw)[both]
            deltas[(regimes[i], regimes[j])] = float(d.max()) if d.size else math.nan
            if shots:
                bound = 3 * np.hypot(a.stderr, b.stderr)[both]
            else:
                bound = np.full(d.shape, exact_tolerance)
            fractions.append(float(np.mean(d <= bound)) if d.size else 0.0)

    frac = min(fractions)
    return ComparisonReport(sweeps, deltas, frac, frac >= required_fraction, exact_tolerance)
