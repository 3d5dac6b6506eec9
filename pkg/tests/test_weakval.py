import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakmeas import qcore
from weakmeas.qcore import I2, KET0, KET1, PLUS, Z
from weakmeas.weakval import (
    A_GATE,
    DivergentPostSelection,
    PrePostSelection,
    b_operator,
    convert_abar_to_a,
    cphase,
    hamiltonian_cphase,
    theory_curve,
    weak_value,
)

from conftest import SAFE_GAMMA, qubit_states, random_state


def cot_form(g):
    """1 / (cot(g) + 1), straight from its definition."""
    return 1 / (math.cos(g) / math.sin(g) + 1)


class TestWeakValue:
    def test_quarter_turn(self):
        assert weak_value(A_GATE, PrePostSelection(math.pi / 4)) == pytest.approx(0.5)

    def test_zero(self):
        assert weak_value(A_GATE, PrePostSelection(0.0)) == pytest.approx(0)

    def test_three_eighths(self):
        g = 3 * math.pi / 8
        # inner products by hand: <+|A|psi> = sin g / sqrt2, <+|psi> = (cos g + sin g) / sqrt2
        by_hand = math.sin(g) / (math.cos(g) + math.sin(g))
        w = weak_value(A_GATE, PrePostSelection(g))
        assert w == pytest.approx(by_hand, abs=1e-12)
        assert w.real == pytest.approx(0.70711, abs=1e-5)

    def test_divergent(self):
        with pytest.raises(DivergentPostSelection):
            weak_value(A_GATE, PrePostSelection(3 * math.pi / 4))

    def test_anomalous_values_allowed(self):
        assert weak_value(A_GATE, PrePostSelection(0.7 * math.pi)).real > 1


class TestTheoryCurve:
    def test_quarter_turn(self):
        assert theory_curve(math.pi / 4) == pytest.approx(0.5)

    def test_half_turn(self):
        assert theory_curve(math.pi / 2) == pytest.approx(1)

    def test_eighth_turn(self):
        g = math.pi / 8
        assert theory_curve(g) == pytest.approx(cot_form(g), abs=1e-12)
        assert theory_curve(g) == pytest.approx(0.29289, abs=1e-5)
        assert theory_curve(g) == pytest.approx(weak_value(A_GATE, PrePostSelection(g)).real, abs=1e-12)

    def test_zero_limit(self):
        assert theory_curve(0.0) == 0

    def test_divergent(self):
        with pytest.raises(DivergentPostSelection):
            theory_curve(3 * math.pi / 4)

    @given(SAFE_GAMMA.filter(lambda g: 1e-3 < g < math.pi - 1e-3))
    def test_matches_cot_form(self, g):
        assert theory_curve(g) == pytest.approx(cot_form(g), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("abar, a", [(1, 0), (-1, 1), (0, 0.5)])
def test_convert_abar_to_a(abar, a):
    assert convert_abar_to_a(abar) == a


class TestCPhase:
    def test_zero(self):
        np.testing.assert_allclose(cphase(0), np.eye(4))

    def test_sign(self):
        np.testing.assert_allclose(cphase(math.pi), np.diag([1, 1, 1, -1]), atol=1e-15)

    def test_half(self):
        np.testing.assert_allclose(cphase(math.pi / 2), np.diag([1, 1, 1, 1j]), atol=1e-15)

    @given(st.floats(-10, 10), st.floats(-10, 10))
    def test_composition(self, a, b):
        np.testing.assert_allclose(cphase(a) @ cphase(b), cphase(math.fmod(a + b, 2 * math.pi)),
                                   atol=1e-12)


class TestHamiltonian:
    def test_zero(self):
        for m in hamiltonian_cphase(0.0):
            np.testing.assert_array_equal(m, np.zeros((4, 4)))

    def test_sign_gate(self):
        h = hamiltonian_cphase(math.pi).h
        assert qcore.phase_aligned_distance(qcore.exp_hermitian(h), np.diag([1, 1, 1, -1])) < 1e-12

    def test_h0_commutes_with_pointer_z(self):
        h0 = hamiltonian_cphase(0.9).h0
        pz = np.kron(I2, Z)
        np.testing.assert_allclose(h0 @ pz - pz @ h0, 0, atol=1e-15)

    @given(st.floats(0, math.pi))
    def test_split_and_exponential(self, phi):
        h, h1, h0 = hamiltonian_cphase(phi)
        np.testing.assert_array_equal(h1 + h0, h)
        u = qcore.exp_hermitian(h)
        overlap = abs(np.vdot(u, cphase(phi))) / 4
        assert overlap == pytest.approx(1, abs=1e-10)
        np.testing.assert_allclose(u, cphase(phi), atol=1e-12)


class TestBOperator:
    def test_quarter_turn(self):
        np.testing.assert_allclose(b_operator(PrePostSelection(math.pi / 4)), (I2 + Z) / 2, atol=1e-15)

    def test_zero(self):
        np.testing.assert_allclose(b_operator(PrePostSelection(0.0)), I2, atol=1e-15)

    def test_half_turn(self):
        np.testing.assert_allclose(b_operator(PrePostSelection(math.pi / 2)), Z, atol=1e-15)

    def test_divergent(self):
        with pytest.raises(DivergentPostSelection):
            b_operator(PrePostSelection(3 * math.pi / 4))

    def test_two_b_identity(self, rng):
        for _ in range(100):
            sel = PrePostSelection.from_states(random_state(rng), random_state(rng))
            abar = weak_value(Z, sel)
            np.testing.assert_allclose(2 * b_operator(sel), (1 + abar) * I2 + (1 - abar) * Z,
                                       atol=1e-10)


def test_curve_identity_on_fifty_points():
    grid = np.linspace(0, math.pi, 50, endpoint=False)
    grid = grid[np.abs(grid - 0.75 * math.pi) > 1e-3]
    for g in grid:
        assert abs(weak_value(A_GATE, PrePostSelection(g)) - theory_curve(g)) < 1e-12


@given(qubit_states(), qubit_states())
def test_conversion_consistency(psi_i, psi_f):
    sel = PrePostSelection.from_states(psi_i, psi_f)
    if abs(sel.amplitude) < 0.05:
        return
    assert abs(weak_value(A_GATE, sel) - convert_abar_to_a(weak_value(Z, sel))) < 1e-12


def test_default_post_selection_is_plus():
    np.testing.assert_array_equal(PrePostSelection(0.3).psi_f, PLUS)
    np.testing.assert_allclose(PrePostSelection(0.3).psi_i, math.cos(0.3) * KET0 + math.sin(0.3) * KET1)
