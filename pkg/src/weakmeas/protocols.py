"""Exact execution of the three weak-value estimation regimes.

Every regime is simulated with the full 4x4 evolution. The first-order formulas
only enter when pointer statistics are inverted into weak-value estimates, and
there they take a fitted *effective* coupling instead of the nominal one.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import qcore
from .qcore import KET0, KET1, MINUS, PLUS, X, Y, Z
from .weakval import PrePostSelection, convert_abar_to_a, cphase


class Regime(str, enum.Enum):
    WEAK = "weak"
    INSENSITIVE = "insensitive"
    ERASURE = "erasure"


class FeedForward(str, enum.Enum):
    TRUE_OPERATOR = "true-operator"
    SIMULATED_PROJECTION = "simulated-projection"
    OFF = "off"


class CouplingMeaning(str, enum.Enum):
    PHASE_SHIFT_PHI = "phase_shift_phi"
    POINTER_DELTA = "pointer_delta"
    WEAK_G = "weak_g"


class InvalidStats(ValueError):
    pass


class NonInvertible(ArithmeticError):
    pass


@dataclass(frozen=True)
class CouplingConstant:
    value: float
    meaning: CouplingMeaning

    def __post_init__(self):
        v = self.value
        if self.meaning is CouplingMeaning.PHASE_SHIFT_PHI and not 0 <= v <= math.pi:
            raise ValueError(f"phase shift must lie in [0, pi], got {v}")
        if self.meaning is CouplingMeaning.POINTER_DELTA and not -1 < v < 1:
            raise ValueError(f"pointer deviation must lie in (-1, 1), got {v}")
        if self.meaning is CouplingMeaning.WEAK_G and v < 0:
            raise ValueError(f"weak coupling must be non-negative, got {v}")


_MEANING = {
    Regime.WEAK: CouplingMeaning.PHASE_SHIFT_PHI,
    Regime.INSENSITIVE: CouplingMeaning.POINTER_DELTA,
    Regime.ERASURE: CouplingMeaning.POINTER_DELTA,
}

# Pointer observable each regime's estimator reads.
MEASURED = {Regime.WEAK: "x", Regime.INSENSITIVE: "x", Regime.ERASURE: "z"}


@dataclass(frozen=True)
class RegimeConfig:
    regime: Regime
    coupling: CouplingConstant
    sel: PrePostSelection = field(default_factory=lambda: PrePostSelection(np.pi / 4))
    feedforward: FeedForward = FeedForward.TRUE_OPERATOR

    def __post_init__(self):
        if self.coupling.meaning is not _MEANING[self.regime]:
            raise ValueError(
                f"{self.regime.value} regime takes a {_MEANING[self.regime].value} coupling, "
                f"got {self.coupling.meaning.value}"
            )

    @classmethod
    def create(cls, regime: Regime | str, coupling: float, gamma: float = np.pi / 4,
               feedforward: FeedForward | str = FeedForward.TRUE_OPERATOR) -> "RegimeConfig":
        regime = Regime(regime)
        return cls(regime, CouplingConstant(coupling, _MEANING[regime]),
                   PrePostSelection(gamma), FeedForward(feedforward))

    def at(self, gamma: float) -> "RegimeConfig":
        return replace(self, sel=PrePostSelection(gamma, self.sel.psi_f))


@dataclass(frozen=True)
class PointerStats:
    """Pointer statistics conditioned on passing the system post-selection.

    ``exp_*`` are expectations in the normalized conditional pointer state (NaN
    where a regime does not define them). ``pointer_norm`` is the squared norm of
    that state before normalization, relative to |<psi_f|psi_i>|^2; multiplying
    an expectation by it gives the weak-value-normalized pointer expectation.
    ``outcome_probs`` is the joint distribution of (pointer outcome, post-selection
    pass/fail) in the basis the regime measures, labelled ``"<outcome>|pass"``.
    """

    p_postselect: float
    exp_x: float
    exp_y: float
    exp_z: float
    system_fidelity: float
    outcome_probs: Mapping[str, float]
    measured: str = "x"
    valid: bool = True
    pointer_norm: float = float("nan")
    stderr: Mapping[str, float] = field(default_factory=dict)

    @property
    def raw(self) -> float:
        """Expectation of the observable the regime's estimator uses."""
        return self.exp_x if self.measured == "x" else self.exp_z

    @property
    def raw_stderr(self) -> float:
        return self.stderr.get(self.measured, 0.0)


@dataclass(frozen=True)
class WeakValueEstimate:
    value: complex
    method: str
    effective_coupling: float
    valid: bool
    stderr: float = 0.0


def _perp(psi: np.ndarray) -> np.ndarray:
    return np.array([-np.conj(psi[1]), np.conj(psi[0])], dtype=complex)


def _pointer_expectations(residual: np.ndarray | None) -> tuple[float, float, float]:
    if residual is None:
        return (math.nan,) * 3
    p = qcore.normalize(residual)
    return tuple(qcore.expectation(o, p) for o in (X, Y, Z))


def _run_local(sel: PrePostSelection, pointer: np.ndarray, gate: np.ndarray,
               basis: tuple[np.ndarray, np.ndarray], labels: tuple[str, str],
               measured: str) -> PointerStats:
    """Gate on psi_i (x) pointer, post-select the system, read the pointer in ``basis``."""
    joint = gate @ qcore.tensor(sel.psi_i, pointer)
    passed = qcore.project(joint, sel.psi_f, "system")
    failed = qcore.project(joint, _perp(sel.psi_f), "system")

    probs = {}
    for branch, res in (("pass", passed.residual), ("fail", failed.residual)):
        for label, b in zip(labels, basis):
            probs[f"{label}|{branch}"] = 0.0 if res is None else float(abs(np.vdot(b, res)) ** 2)

    ex, ey, ez = _pointer_expectations(passed.residual)
    overlap2 = abs(sel.amplitude) ** 2
    return PointerStats(
        p_postselect=passed.probability,
        exp_x=ex, exp_y=ey, exp_z=ez,
        system_fidelity=qcore.fidelity(sel.psi_i, qcore.partial_trace_system(joint)),
        outcome_probs=probs,
        measured=measured,
        valid=not sel.divergent,
        pointer_norm=passed.probability / overlap2 if overlap2 > 0 else math.inf,
    )


def run_weak_regime(sel: PrePostSelection, phi: float) -> PointerStats:
    """cphase(phi) with the pointer in |+>; pointer read in the X basis."""
    return _run_local(sel, PLUS, cphase(phi), (PLUS, MINUS), ("plus", "minus"), "x")


def insensitive_pointer(delta: float) -> np.ndarray:
    """alpha|+> + beta|-> with alpha - beta = delta and alpha + beta = sqrt(2 - delta^2)."""
    return np.array([math.sqrt(1 - delta**2 / 2), delta / math.sqrt(2)], dtype=complex)


def delta_from_hwp(angle: float) -> float:
    """Pointer deviation produced by a half-wave plate at ``angle`` acting on |H>."""
    return math.sqrt(2) * math.sin(2 * angle)


def run_insensitive_regime(sel: PrePostSelection, delta: float) -> PointerStats:
    """c-sign with a pointer close to |0>; pointer read in the X basis."""
    return _run_local(sel, insensitive_pointer(delta), cphase(math.pi),
                      (PLUS, MINUS), ("plus", "minus"), "x")


def run_strong_pointer_regime(sel: PrePostSelection) -> PointerStats:
    """c-sign with the pointer in |+> and no erasure: a projective measurement.

    Here ``exp_x * pointer_norm`` equals Re(Abar_w) and ``exp_z * pointer_norm``
    equals (1 - |Abar_w|^2) / 2.
    """
    return _run_local(sel, PLUS, cphase(math.pi), (PLUS, MINUS), ("plus", "minus"), "x")


def erasure_basis(delta: float) -> tuple[np.ndarray, np.ndarray]:
    ge = math.sqrt(1 - delta**2)
    return (np.array([ge, delta], dtype=complex), np.array([delta, -ge], dtype=complex))


def run_erasure_regime(sel: PrePostSelection, delta: float,
                       feedforward: FeedForward | str = FeedForward.TRUE_OPERATOR) -> PointerStats:
    """c-sign, pointer projected near |0>/|1>, feed-forward Z on the perp outcome.

    ``exp_z`` is the conditional asymmetry (p_phi - p_perp) / (p_phi + p_perp)
    over post-selected events. ``exp_x``/``exp_y`` are not defined here because
    the feed-forward makes the conditional pointer state outcome dependent.
    """
    feedforward = FeedForward(feedforward)
    joint = cphase(math.pi) @ qcore.tensor(sel.psi_i, PLUS)
    phi_p, phi_perp = erasure_basis(delta)
    psi_f, psi_f_perp = sel.psi_f, _perp(sel.psi_f)

    probs = {}
    fid = 0.0
    for label, b in (("phi", phi_p), ("perp", phi_perp)):
        branch = qcore.project(joint, b, "pointer").residual
        if branch is None:
            branch = np.zeros(2, dtype=complex)
        corrected = Z @ branch if label == "perp" else branch
        post, post_perp = psi_f, psi_f_perp
        if label == "perp":
            if feedforward is FeedForward.TRUE_OPERATOR:
                branch = corrected
            elif feedforward is FeedForward.SIMULATED_PROJECTION:
                # Z is hermitian: <psi_f|Z b> = <Z psi_f|b>
                post, post_perp = Z @ psi_f, Z @ psi_f_perp
        p_pass = float(abs(np.vdot(post, branch)) ** 2)
        p_fail = float(abs(np.vdot(post_perp, branch)) ** 2)
        probs[f"{label}|pass"] = p_pass
        probs[f"{label}|fail"] = p_fail
        # a simulated projection is equivalent to the corrected state
        kept = branch if feedforward is FeedForward.OFF else corrected
        fid += float(abs(np.vdot(sel.psi_i, kept)) ** 2)

    p_post = probs["phi|pass"] + probs["perp|pass"]
    exp_z = (probs["phi|pass"] - probs["perp|pass"]) / p_post if p_post > 0 else math.nan
    overlap2 = abs(sel.amplitude) ** 2
    return PointerStats(
        p_postselect=p_post,
        exp_x=math.nan, exp_y=math.nan, exp_z=exp_z,
        system_fidelity=min(fid, 1.0),
        outcome_probs=probs,
        measured="z",
        valid=not sel.divergent,
        pointer_norm=p_post / overlap2 if overlap2 > 0 else math.inf,
    )


def run_regime(config: RegimeConfig) -> PointerStats:
    v = config.coupling.value
    if config.regime is Regime.WEAK:
        return run_weak_regime(config.sel, v)
    if config.regime is Regime.INSENSITIVE:
        return run_insensitive_regime(config.sel, v)
    return run_erasure_regime(config.sel, v, config.feedforward)


def invert(regime: Regime | str, raw, coupling: float):
    """First-order inversion of a pointer expectation into A_w (vectorized).

    weak:        <X> = 1 - g^2 |A_w|^2          ->  |A_w| = sqrt(1 - <X>) / g
    insensitive: <X> = delta * Abar_w           ->  A_w = (1 - <X>/delta) / 2
    erasure:     <Z> = 4 delta * Abar_w         ->  A_w = (1 - <Z>/(4 delta)) / 2
    """
    regime = Regime(regime)
    raw = np.asarray(raw, dtype=float)
    if regime is Regime.WEAK:
        return np.sqrt(np.clip(1 - raw, 0, None)) / coupling
    if regime is Regime.INSENSITIVE:
        return convert_abar_to_a(raw / coupling)
    return convert_abar_to_a(raw / (4 * coupling))


def forward_model(regime: Regime | str, aw, coupling: float):
    """Pointer statistic whose first-order inversion gives ``aw``; inverse of :func:`invert`."""
    regime = Regime(regime)
    aw = np.asarray(aw, dtype=float)
    if regime is Regime.WEAK:
        return 1 - (coupling * aw) ** 2
    scale = coupling if regime is Regime.INSENSITIVE else 4 * coupling
    return scale * (1 - 2 * aw)


def invert_stderr(regime: Regime | str, raw, raw_stderr, coupling: float):
    """Delta-method standard error of :func:`invert`."""
    regime = Regime(regime)
    raw = np.asarray(raw, dtype=float)
    se = np.asarray(raw_stderr, dtype=float)
    if regime is Regime.WEAK:
        d = np.sqrt(np.clip(1 - raw, 0, None))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(d > 0, se / (2 * coupling * np.where(d > 0, d, 1)), 0.0)
        return out
    if regime is Regime.INSENSITIVE:
        return se / (2 * abs(coupling))
    return se / (8 * abs(coupling))


def estimate_weak_value(stats: PointerStats, config: RegimeConfig,
                        effective_coupling: float) -> WeakValueEstimate:
    regime = config.regime
    method = regime.value
    if regime is Regime.WEAK:
        method += " (magnitude; sign from <Y> when measured)"
    if not stats.valid:
        return WeakValueEstimate(complex(math.nan), method, effective_coupling, False)
    raw = stats.raw
    if not math.isfinite(raw):
        raise InvalidStats(f"no finite <{stats.measured}> in stats")
    if regime is Regime.WEAK and raw > 1 + 1e-12:
        raise NonInvertible(f"<X> = {raw} exceeds 1")

    value = float(invert(regime, raw, effective_coupling))
    if regime is Regime.WEAK and math.isfinite(stats.exp_y) and stats.exp_y < 0:
        value = -value
    se = float(invert_stderr(regime, raw, stats.raw_stderr, effective_coupling))
    return WeakValueEstimate(complex(value), method, effective_coupling, True, se)
