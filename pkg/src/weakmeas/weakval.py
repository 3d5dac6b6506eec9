"""Weak values, the controlled-phase gate and its Hamiltonian split.

Polarization encoding is fixed throughout the package: |H> -> |0>, |V> -> |1>.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .qcore import I2, KET0, KET1, PLUS, Z, qubit

POSTSELECTION_THRESHOLD = 1e-12

# Observable whose weak value the gate family measures, and its strong-coupling
# counterpart Abar = I - 2A.
A_GATE = (I2 - Z) / 2
ABAR_GATE = Z


class DivergentPostSelection(ArithmeticError):
    """Pre- and post-selected states are (numerically) orthogonal."""


@dataclass(frozen=True)
class PrePostSelection:
    """Pre-selection cos(gamma)|0> + sin(gamma)|1> and a post-selected state."""

    gamma: float
    psi_f: np.ndarray = field(default_factory=lambda: PLUS.copy())
    psi_i_override: np.ndarray | None = None

    @property
    def psi_i(self) -> np.ndarray:
        if self.psi_i_override is not None:
            return self.psi_i_override
        return qubit(self.gamma)

    @property
    def amplitude(self) -> complex:
        """<psi_f|psi_i>."""
        return complex(np.vdot(self.psi_f, self.psi_i))

    @property
    def divergent(self) -> bool:
        return abs(self.amplitude) ** 2 < POSTSELECTION_THRESHOLD

    @classmethod
    def from_states(cls, psi_i: np.ndarray, psi_f: np.ndarray) -> "PrePostSelection":
        """Arbitrary normalized pre/post-selection (gamma is then meaningless)."""
        return cls(gamma=float("nan"), psi_f=np.asarray(psi_f, dtype=complex),
                   psi_i_override=np.asarray(psi_i, dtype=complex))


def weak_value(a: np.ndarray, sel: PrePostSelection) -> complex:
    """<psi_f|A|psi_i> / <psi_f|psi_i>; anomalous values are allowed."""
    if sel.divergent:
        raise DivergentPostSelection(f"|<psi_f|psi_i>|^2 below {POSTSELECTION_THRESHOLD}")
    return complex(np.vdot(sel.psi_f, a @ sel.psi_i)) / sel.amplitude


def theory_curve(gamma: float) -> float:
    """Weak value of (I - Z)/2 for cos/sin pre-selection and |+> post-selection.

    Written as sin/(cos + sin), which equals 1/(cot(gamma) + 1) and stays finite
    at gamma = 0.
    """
    c, s = np.cos(gamma), np.sin(gamma)
    if (c + s) ** 2 / 2 < POSTSELECTION_THRESHOLD:
        raise DivergentPostSelection(f"gamma={gamma} is orthogonal to the post-selection")
    return float(s / (c + s))


def convert_abar_to_a(abar_w: complex) -> complex:
    return (1 - abar_w) / 2


def cphase(phi: float) -> np.ndarray:
    return np.diag([1, 1, 1, np.exp(1j * phi)]).astype(complex)


class CPhaseHamiltonian(NamedTuple):
    h: np.ndarray
    h1: np.ndarray
    h0: np.ndarray


def hamiltonian_cphase(phi: float) -> CPhaseHamiltonian:
    """Generator of cphase(phi) with hbar/t stripped, split into h1 + h0.

    The overall sign is chosen so that exp(-i h) == cphase(phi) exactly; h1 is
    the system-pointer interaction and h0 a local term on the first factor.
    """
    k = -phi / 4
    iz = I2 - Z
    h = k * np.kron(iz, iz)
    h1 = k * np.kron(Z - I2, Z)
    h0 = k * np.kron(iz, I2)
    return CPhaseHamiltonian(h, h1, h0)


def strong_unitary(a0: np.ndarray = KET0, a1: np.ndarray = KET1) -> np.ndarray:
    """|a0><a0| (x) I + |a1><a1| (x) Z."""
    return np.kron(np.outer(a0, a0.conj()), I2) + np.kron(np.outer(a1, a1.conj()), Z)


def b_operator(sel: PrePostSelection, a0: np.ndarray = KET0, a1: np.ndarray = KET1) -> np.ndarray:
    """Pointer operator <psi_f|U_s|psi_i> / <psi_f|psi_i>."""
    if sel.divergent:
        raise DivergentPostSelection(f"|<psi_f|psi_i>|^2 below {POSTSELECTION_THRESHOLD}")
    u = strong_unitary(a0, a1).reshape(2, 2, 2, 2)  # (sys_out, ptr_out, sys_in, ptr_in)
    b = np.einsum("i,ijkl,k->jl", sel.psi_f.conj(), u, sel.psi_i)
    return b / sel.amplitude
