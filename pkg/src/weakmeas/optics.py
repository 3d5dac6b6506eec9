"""Polarization-level model of the tunable linear-optical c-phase gate.

Two photons: the pointer, which a beam displacer splits into a lower (|H>) and
an upper (|V>) interferometer arm, and the signal (measured system), which
always crosses the partially polarizing beam splitter (PPBS). Amplitudes are
stored as ``amps[path, pointer_pol, signal_pol]`` with path 0 = lower arm (also
used for the single external mode before the first and after the second
displacer) and path 1 = upper arm.

Only the coincidence sector is tracked: every element maps amplitudes linearly
and never increases the norm, so the squared norm of the state is the
probability that both photons reach their output ports.

Modelling choices:

* Displacers carry no phase. The second one passes the upper arm's |H>
  component and recombines the lower arm as |V>, folding in the lower-arm
  half-wave plate. The upper arm's |V> component leaves the output, so the
  displacer doubles as the polarization projection that erases the
  upper-arm polarization.
* HWP4, HWP5, the polarizer and the spectral filters are identities and are
  left out of the chain.
* HWP2 sits at 75 deg (equivalently -15 deg), the setting that turns |V> into
  linear polarization at 60 deg under the convention HWP(t)|H> = cos 2t|H> +
  sin 2t|V>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .qcore import phase_aligned_distance
from .weakval import cphase

LOWER, UPPER = 0, 1
H, V = 0, 1

T_H = 1.0
T_V = 1 / math.sqrt(3)
R_V2 = 2 / 3
# both photons vertical: transmitted-transmitted minus reflected-reflected
T_VV = T_V**2 - R_V2

HWP2_ANGLE = 5 * math.pi / 12
QWP1_ANGLE = 0.0
HWP6_ANGLE = math.pi / 4
SIGNAL_H_BALANCE = 1 / math.sqrt(3)
LOWER_ARM_BALANCE = 0.5

Placement = Literal["pointer-upper", "pointer-lower", "pointer", "signal", "both"]


class ChainUnbalanced(RuntimeError):
    pass


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]], dtype=complex)


@dataclass(frozen=True)
class JonesElement:
    kind: Literal["hwp", "qwp", "polarizer", "attenuator"]
    angle: float = 0.0
    amplitude: float = 1.0
    axis: float | None = None  # attenuators only: None attenuates both polarizations

    def __post_init__(self):
        if self.kind == "attenuator" and not 0 < self.amplitude <= 1:
            raise ValueError(f"attenuator amplitude must lie in (0, 1], got {self.amplitude}")

    @property
    def matrix(self) -> np.ndarray:
        t = self.angle
        if self.kind == "hwp":
            c, s = math.cos(2 * t), math.sin(2 * t)
            return np.array([[c, s], [s, -c]], dtype=complex)
        if self.kind == "qwp":
            # fast axis at t; QWP(0) = diag(1, -i) sends |+> to |R> = (|H> - i|V>)/sqrt2
            return _rot(-t) @ np.diag([1, -1j]) @ _rot(t)
        if self.kind == "polarizer":
            v = np.array([math.cos(t), math.sin(t)], dtype=complex)
            return np.outer(v, v)
        if self.kind == "attenuator":
            if self.axis is None:
                return self.amplitude * np.eye(2, dtype=complex)
            return _rot(-self.axis) @ np.diag([self.amplitude, 1]).astype(complex) @ _rot(self.axis)
        raise ValueError(f"unknown element kind {self.kind!r}")


def hwp(theta: float) -> JonesElement:
    return JonesElement("hwp", theta)


def qwp(theta: float) -> JonesElement:
    return JonesElement("qwp", theta)


def polarizer(theta: float) -> JonesElement:
    return JonesElement("polarizer", theta)


def attenuator(amplitude: float, axis: float | None = None) -> JonesElement:
    return JonesElement("attenuator", amplitude=amplitude, axis=axis)


@dataclass(frozen=True)
class TwoPhotonAmplitudes:
    amps: np.ndarray = field(default_factory=lambda: np.zeros((2, 2, 2), dtype=complex))

    @classmethod
    def product(cls, pointer: np.ndarray, signal: np.ndarray, path: int = LOWER) -> "TwoPhotonAmplitudes":
        a = np.zeros((2, 2, 2), dtype=complex)
        a[path] = np.outer(pointer, signal)
        return cls(a)

    @classmethod
    def basis(cls, pointer: int, signal: int) -> "TwoPhotonAmplitudes":
        """External |pointer, signal> input, 0 = H and 1 = V."""
        a = np.zeros((2, 2, 2), dtype=complex)
        a[LOWER, pointer, signal] = 1
        return cls(a)

    @property
    def success_amplitude(self) -> float:
        return float(np.linalg.norm(self.amps))

    def external_vector(self) -> np.ndarray:
        """Pointer-first (HH, HV, VH, VV) amplitudes of the external mode."""
        return self.amps[LOWER].reshape(4).copy()


class ChainStep(NamedTuple):
    name: str
    kind: str  # "bd-split", "bd-merge", "ppbs" or "jones"
    placement: Placement
    element: JonesElement | None = None


def _apply_jones(a: np.ndarray, m: np.ndarray, placement: Placement) -> np.ndarray:
    out = a.copy()
    if placement == "pointer-upper":
        out[UPPER] = m @ a[UPPER]
    elif placement in ("pointer-lower", "pointer"):
        out[LOWER] = m @ a[LOWER]
    elif placement == "signal":
        out = a @ m.T
    else:
        raise ValueError(f"a Jones element cannot act on {placement!r}")
    return out


def _bd_split(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[LOWER, H] = a[LOWER, H]
    out[UPPER, V] = a[LOWER, V]
    return out


def _bd_merge(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    out[LOWER, H] = a[UPPER, H]
    out[LOWER, V] = a[LOWER, H]
    return out


PPBS_UPPER = np.array([[T_H * T_H, T_H * T_V], [T_V * T_H, T_VV]], dtype=complex)
PPBS_SIGNAL_ONLY = np.array([T_H, T_V], dtype=complex)


def ppbs_coincidence(state: TwoPhotonAmplitudes) -> TwoPhotonAmplitudes:
    """Both-transmitted sector of the PPBS.

    A pointer photon in the upper arm meets the signal photon; the VV amplitude
    picks up the two-photon interference value t_V^2 - r_V^2 = -1/3. A lower-arm
    pointer misses the PPBS and only the signal is filtered.
    """
    a = state.amps.copy()
    a[UPPER] = a[UPPER] * PPBS_UPPER
    a[LOWER] = a[LOWER] * PPBS_SIGNAL_ONLY[None, :]
    return TwoPhotonAmplitudes(a)


def apply_step(step: ChainStep, state: TwoPhotonAmplitudes) -> TwoPhotonAmplitudes:
    if step.kind == "bd-split":
        return TwoPhotonAmplitudes(_bd_split(state.amps))
    if step.kind == "bd-merge":
        return TwoPhotonAmplitudes(_bd_merge(state.amps))
    if step.kind == "ppbs":
        return ppbs_coincidence(state)
    return TwoPhotonAmplitudes(_apply_jones(state.amps, step.element.matrix, step.placement))


@dataclass(frozen=True)
class OpticalChain:
    steps: tuple[ChainStep, ...]
    phi: float
    balanced: bool

    def describe(self) -> str:
        lines = [f"# c-phase chain phi={self.phi:.12g} balanced={str(self.balanced).lower()}",
                 "element,placement,kind,angle_deg,amplitude"]
        for s in self.steps:
            if s.element is None:
                lines.append(f"{s.name},{s.placement},{s.kind},,")
            else:
                e = s.element
                angle = e.axis if e.kind == "attenuator" else e.angle
                angle = "" if angle is None else f"{math.degrees(angle):.12g}"
                lines.append(f"{s.name},{s.placement},{e.kind},{angle},{e.amplitude:.12g}")
        return "\n".join(lines)


def build_chain(phi: float, balance: bool = True) -> OpticalChain:
    """Displacer, HWP2, PPBS, QWP1, HWP3, displacer, HWP6.

    HWP3 at phi/4 sends |R> -> e^{-i phi/2}|L> and |L> -> e^{i phi/2}|R>. With
    ``balance`` two attenuators (signal |H> and the lower arm) equalize the
    success amplitude of all four basis inputs.
    """
    if not 0 <= phi <= math.pi:
        raise ValueError(f"phi must lie in [0, pi], got {phi}")
    steps = [
        ChainStep("BD1", "bd-split", "pointer"),
        ChainStep("HWP2", "jones", "pointer-upper", hwp(HWP2_ANGLE)),
        ChainStep("PPBS", "ppbs", "both"),
    ]
    if balance:
        steps.append(ChainStep("ATT-signal-H", "jones", "signal", attenuator(SIGNAL_H_BALANCE, axis=0.0)))
    steps += [
        ChainStep("QWP1", "jones", "pointer-upper", qwp(QWP1_ANGLE)),
        ChainStep("HWP3", "jones", "pointer-upper", hwp(phi / 4)),
    ]
    if balance:
        steps.append(ChainStep("ATT-lower", "jones", "pointer-lower", attenuator(LOWER_ARM_BALANCE)))
    steps += [
        ChainStep("BD2", "bd-merge", "pointer"),
        ChainStep("HWP6", "jones", "pointer", hwp(HWP6_ANGLE)),
    ]
    return OpticalChain(tuple(steps), phi, balance)


class TraceRow(NamedTuple):
    name: str
    state: TwoPhotonAmplitudes


def evaluate_chain(chain: OpticalChain, state: TwoPhotonAmplitudes) -> list[TraceRow]:
    """State after every element, starting with the input."""
    rows = [TraceRow("input", state)]
    for step in chain.steps:
        state = apply_step(step, state)
        rows.append(TraceRow(step.name, state))
    return rows


def _swap_order(m: np.ndarray) -> np.ndarray:
    """Re-index a 4x4 map between pointer-first and system-first ordering."""
    p = np.array([0, 2, 1, 3])
    return m[np.ix_(p, p)]


def transfer_matrix(chain: OpticalChain) -> np.ndarray:
    """Raw coincidence map in system-first ordering (index 2*signal + pointer)."""
    cols = []
    for ptr in (H, V):
        for sig in (H, V):
            cols.append(evaluate_chain(chain, TwoPhotonAmplitudes.basis(ptr, sig))[-1].state.external_vector())
    return _swap_order(np.array(cols).T)


def basis_amplitudes(chain: OpticalChain) -> dict[str, float]:
    """Success amplitude of each (pointer, signal) basis input, e.g. ``"VH"``."""
    out = {}
    for ptr in (H, V):
        for sig in (H, V):
            final = evaluate_chain(chain, TwoPhotonAmplitudes.basis(ptr, sig))[-1].state
            out["HV"[ptr] + "HV"[sig]] = final.success_amplitude
    return out


def effective_gate(chain: OpticalChain, tol: float = 1e-9) -> tuple[np.ndarray, float]:
    """Gate implemented on coincidences, system-first, and its success probability.

    A balanced chain returns the unitary (the raw map divided by the common
    amplitude). An unbalanced one returns the raw map and the success
    probability averaged over the four basis inputs.
    """
    m = transfer_matrix(chain)
    amps = np.linalg.norm(m, axis=0)
    if chain.balanced:
        if amps.max() - amps.min() > tol:
            raise ChainUnbalanced(f"basis success amplitudes differ: {amps}")
        a = float(amps.mean())
        return m / a, a * a
    return m, float(np.mean(amps**2))


def pointer_phase(phi: float) -> np.ndarray:
    """diag(1, e^{-i phi/2}) on the pointer, as a system-first 4x4 operator."""
    return np.kron(np.eye(2), np.diag([1, np.exp(-0.5j * phi)]))


def gate_distance(chain: OpticalChain) -> float:
    """Phase-aligned Frobenius distance between the chain and D(phi) cphase(phi)."""
    gate, _ = effective_gate(chain)
    return phase_aligned_distance(gate, pointer_phase(chain.phi) @ cphase(chain.phi))


PLUS60 = np.array([0.5, math.sqrt(3) / 2], dtype=complex)
_POL = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / math.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / math.sqrt(2),
    "R": np.array([1, -1j], dtype=complex) / math.sqrt(2),
    "L": np.array([1, 1j], dtype=complex) / math.sqrt(2),
    "+60": PLUS60,
}

# (element, pointer polarization, arm, signal polarization, phase sign) for the
# two non-trivial inputs; the phase is exp(sign * i phi / 2).
TRACE_REFERENCE = {
    "VH": [("BD1", "V", UPPER, "H", 0), ("HWP2", "+60", UPPER, "H", 0),
           ("PPBS", "+", UPPER, "H", 0), ("QWP1", "R", UPPER, "H", 0),
           ("HWP3", "L", UPPER, "H", -1), ("BD2", "H", LOWER, "H", -1),
           ("HWP6", "V", LOWER, "H", -1)],
    "VV": [("BD1", "V", UPPER, "V", 0), ("HWP2", "+60", UPPER, "V", 0),
           ("PPBS", "-", UPPER, "V", 0), ("QWP1", "L", UPPER, "V", 0),
           ("HWP3", "R", UPPER, "V", 1), ("BD2", "H", LOWER, "V", 1),
           ("HWP6", "V", LOWER, "V", 1)],
}


def trace_reference_rows(phi: float) -> dict[str, list[TraceRow]]:
    """Reference states of each two-mode trace row, with unit norm."""
    out = {}
    for case, rows in TRACE_REFERENCE.items():
        out[case] = [
            TraceRow(name, TwoPhotonAmplitudes.product(
                np.exp(0.5j * sign * phi) * _POL[p], _POL[s], arm))
            for name, p, arm, s, sign in rows
        ]
    return out


def trace_overlaps(chain: OpticalChain) -> dict[str, list[tuple[str, float]]]:
    """|<expected|actual>| (after normalizing) for every reference trace row."""
    expected = trace_reference_rows(chain.phi)
    out = {}
    for case, rows in expected.items():
        ptr, sig = ("HV".index(case[0]), "HV".index(case[1]))
        trace = {r.name: r.state for r in evaluate_chain(chain, TwoPhotonAmplitudes.basis(ptr, sig))}
        res = []
        for name, ref in rows:
            got = trace[name].amps.ravel()
            res.append((name, float(abs(np.vdot(ref.amps.ravel(), got)) / np.linalg.norm(got))))
        out[case] = res
    return out
