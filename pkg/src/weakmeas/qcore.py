"""Two-qubit linear algebra for pure states of a system and a pointer.

States are complex numpy vectors of length 2 or 4 and operators are 2x2 or
4x4 complex arrays. Joint states always put the measured system first, so the
joint index is ``2 * system_bit + pointer_bit``.
"""
from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np

ATOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_L = np.array([1, 1j], dtype=complex) / np.sqrt(2)
KET_R = np.array([1, -1j], dtype=complex) / np.sqrt(2)


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


class Projection(NamedTuple):
    """Unnormalized residual of a projection plus its probability.

    ``residual`` is None when the probability is exactly zero.
    """

    residual: np.ndarray | None
    probability: float


def ket(*amplitudes: complex) -> np.ndarray:
    """Build a normalized state from raw amplitudes."""
    return normalize(np.asarray(amplitudes, dtype=complex))


def qubit(gamma: float) -> np.ndarray:
    """cos(gamma)|0> + sin(gamma)|1>."""
    return np.array([np.cos(gamma), np.sin(gamma)], dtype=complex)


def normalize(s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    n = np.linalg.norm(s)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return s / n


def _check_state(s: np.ndarray, dims=(2, 4)) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.ndim != 1 or s.shape[0] not in dims:
        raise DimensionError(f"expected a state of dimension {dims}, got shape {s.shape}")
    return s


def _check_operator(op: np.ndarray) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] not in (2, 4):
        raise DimensionError(f"expected a 2x2 or 4x4 operator, got shape {op.shape}")
    return op


def is_hermitian(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    return bool(np.allclose(op, op.conj().T, rtol=0, atol=atol))


def is_unitary(op: np.ndarray, atol: float = ATOL) -> bool:
    op = np.asarray(op)
    return bool(np.allclose(op.conj().T @ op, np.eye(op.shape[0]), rtol=0, atol=atol))


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of a system state ``a`` and a pointer state ``b``."""
    a = _check_state(a, (2,))
    b = _check_state(b, (2,))
    return np.kron(a, b)


def apply(op: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Matrix-vector product. The result is not renormalized."""
    op = _check_operator(op)
    s = _check_state(s)
    if op.shape[0] != s.shape[0]:
        raise DimensionError(f"operator {op.shape} does not act on a state of dimension {s.shape[0]}")
    return op @ s


def expectation(obs: np.ndarray, s: np.ndarray) -> float:
    obs = _check_operator(obs)
    if not is_hermitian(obs):
        raise NotHermitianError("expectation needs a hermitian observable")
    s = _check_state(s)
    if obs.shape[0] != s.shape[0]:
        raise DimensionError("observable and state dimensions differ")
    return float(np.real(np.vdot(s, obs @ s)))


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>| for normalized inputs; insensitive to global phase."""
    return float(abs(np.vdot(normalize(a), normalize(b))))


def project(
    s: np.ndarray, target: np.ndarray, on: Literal["system", "pointer"]
) -> Projection:
    """Contract ``<target|`` against one factor of a joint state."""
    s = _check_state(s, (4,))
    target = _check_state(target, (2,))
    m = s.reshape(2, 2)  # rows: system, columns: pointer
    if on == "system":
        residual = target.conj() @ m
    elif on == "pointer":
        residual = m @ target.conj()
    else:
        raise ValueError(f"unknown subsystem {on!r}")
    p = float(np.real(np.vdot(residual, residual)))
    if p == 0.0:
        return Projection(None, 0.0)
    return Projection(residual, min(p, 1.0))


def partial_trace_system(s: np.ndarray) -> np.ndarray:
    """Reduced density matrix of the system (first) factor."""
    s = _check_state(s, (4,))
    m = s.reshape(2, 2)
    return m @ m.conj().T


def fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    psi = _check_state(psi, (2,))
    f = float(np.real(np.vdot(psi, rho @ psi)))
    return min(max(f, 0.0), 1.0)


def exp_hermitian(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """exp(-i * scale * h) for a hermitian ``h``."""
    h = _check_operator(h)
    if not is_hermitian(h):
        raise NotHermitianError("exp_hermitian needs a hermitian generator")
    diag = np.diag(np.diag(h))
    if np.array_equal(h, diag):
        return np.diag(np.exp(-1j * scale * np.real(np.diag(h))))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius distance min over theta of ||a - e^{i theta} b||."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    inner = np.vdot(b, a)
    phase = inner / abs(inner) if abs(inner) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))
