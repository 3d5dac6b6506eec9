import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from weakmeas.montecarlo import (
    DERIVE_SEED_ZERO,
    MeasurementRecord,
    derive_seed,
    empirical_stats,
    sample_record,
)
from weakmeas.protocols import run_weak_regime
from weakmeas.weakval import PrePostSelection

# First three outputs of the reference splitmix64 generator started from state 0.
SPLITMIX64_REFERENCE = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


class TestDeriveSeed:
    def test_zero_constant(self):
        assert derive_seed(0, 0) == DERIVE_SEED_ZERO == 0xE220A8397B1DCDAF

    def test_matches_reference_stream(self):
        assert [derive_seed(0, i) for i in range(3)] == SPLITMIX64_REFERENCE

    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**40))
    def test_deterministic_and_64_bit(self, s, i):
        assert derive_seed(s, i) == derive_seed(s, i)
        assert 0 <= derive_seed(s, i) < 2**64

    def test_neighbouring_indices_differ(self):
        r = np.random.default_rng(1)
        for s in r.integers(0, 2**63, size=1000, dtype=np.int64):
            assert derive_seed(int(s), 0) != derive_seed(int(s), 1)


class TestSampleRecord:
    def test_certain_outcome(self):
        assert dict(sample_record({"a": 1.0}, 100, 5).counts) == {"a": 100}

    def test_fair_coin_golden(self):
        seed = derive_seed(7, 0)
        rec = sample_record({"a": 0.5, "b": 0.5}, 3000, seed)
        assert dict(rec.counts) == {"a": 1496, "b": 1504}
        assert rec == sample_record({"a": 0.5, "b": 0.5}, 3000, seed)
        se = math.sqrt(0.25 / 3000)
        assert abs(rec.counts["a"] / 3000 - 0.5) < 5 * se

    def test_zero_shots(self):
        with pytest.raises(ValueError):
            sample_record({"a": 0.5, "b": 0.5}, 0, 1)

    @pytest.mark.parametrize("probs", [{"a": 0.5, "b": 0.4}, {"a": 1.2, "b": -0.2}, {}, {"a": math.nan}])
    def test_invalid_distribution(self, probs):
        with pytest.raises(ValueError):
            sample_record(probs, 10, 1)

    @given(st.integers(1, 10_000), st.integers(0, 2**64 - 1))
    def test_counts_sum_to_shots(self, shots, seed):
        rec = sample_record({"x": 0.2, "y": 0.3, "z": 0.5}, shots, seed)
        assert sum(rec.counts.values()) == shots == rec.shots

    def test_label_order_does_not_matter(self):
        a = sample_record({"p": 0.3, "q": 0.7}, 500, 9)
        b = sample_record({"q": 0.7, "p": 0.3}, 500, 9)
        assert dict(a.counts) == dict(b.counts)

    def test_record_rejects_inconsistent_counts(self):
        with pytest.raises(ValueError):
            MeasurementRecord({"a": 3}, 4, 0)


class TestEmpiricalStats:
    @staticmethod
    def stats(counts):
        return empirical_stats(MeasurementRecord(counts, sum(counts.values()), 0))

    def test_all_plus(self):
        s = self.stats({"plus": 3000, "minus": 0})
        assert s.exp_x == 1 and s.stderr["x"] == 0

    def test_balanced(self):
        s = self.stats({"plus": 1500, "minus": 1500})
        assert s.exp_x == 0
        assert s.stderr["x"] == pytest.approx(1 / math.sqrt(3000))
        assert s.stderr["x"] == pytest.approx(0.01826, abs=1e-5)

    def test_three_to_one(self):
        assert self.stats({"plus": 2250, "minus": 750}).exp_x == 0.5

    def test_fail_branch_excluded(self):
        s = self.stats({"plus|pass": 300, "minus|pass": 100, "plus|fail": 500, "minus|fail": 100})
        assert s.exp_x == 0.5
        assert s.p_postselect == 0.4

    def test_z_outcomes(self):
        s = self.stats({"phi|pass": 60, "perp|pass": 40})
        assert s.measured == "z" and s.exp_z == pytest.approx(0.2) and math.isnan(s.exp_x)

    def test_unknown_label(self):
        with pytest.raises(ValueError):
            self.stats({"up": 3})

    @given(st.integers(0, 500), st.integers(0, 500))
    def test_expectation_in_range(self, up, down):
        if up + down == 0:
            return
        s = self.stats({"plus": up, "minus": down})
        assert -1 <= s.exp_x <= 1


def test_consistency_as_shots_grow():
    p = 0.3
    mean_err = []
    for n in (10**3, 10**4, 10**5, 10**6):
        errs, inside = [], 0
        for rep in range(1000):
            s = sample_record({"plus": p, "minus": 1 - p}, n, derive_seed(n, rep)).derived_stats
            err = abs(s.exp_x - (2 * p - 1))
            errs.append(err)
            inside += err <= 5 * s.stderr["x"]
        assert inside >= 990
        mean_err.append(np.mean(errs))
    assert all(a > b for a, b in zip(mean_err, mean_err[1:]))


def test_post_selection_composition():
    exact = run_weak_regime(PrePostSelection(0.4), 0.9)
    n = 100_000
    joint = sample_record(exact.outcome_probs, n, derive_seed(11, 0)).counts
    passed = np.array([joint["plus|pass"], joint["minus|pass"]])

    cond = np.array([exact.outcome_probs["plus|pass"], exact.outcome_probs["minus|pass"]])
    cond = cond / cond.sum()
    assert sps.chisquare(passed, passed.sum() * cond).pvalue > 1e-3

    direct = sample_record({"plus": cond[0], "minus": cond[1]}, n, derive_seed(11, 1)).counts
    table = np.array([passed, [direct["plus"], direct["minus"]]])
    assert sps.chi2_contingency(table).pvalue > 1e-3
