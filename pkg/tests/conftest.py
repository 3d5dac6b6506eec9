import math

import numpy as np
import pytest
from hypothesis import strategies as st

from weakmeas.qcore import normalize

# gamma values that keep |<+|psi_i>|^2 well above the divergence threshold
SAFE_GAMMA = st.floats(0.0, math.pi, allow_nan=False).filter(lambda g: abs(g - 0.75 * math.pi) > 0.05)

SMALL_GRID = np.linspace(0.05 * math.pi, 0.6 * math.pi, 20)


@st.composite
def qubit_states(draw):
    parts = draw(st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4))
    v = np.array([parts[0] + 1j * parts[1], parts[2] + 1j * parts[3]])
    if np.linalg.norm(v) < 1e-3:
        v = np.array([1, 0], dtype=complex)
    return normalize(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, dim=2):
    return normalize(rng.normal(size=dim) + 1j * rng.normal(size=dim))


# (criterion id, passed, detail) lines filled in by test_acceptance
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
