"""Finite statistics: seeded multinomial sampling of one erasure point.

The same seed always gives the same counts; the binomial standard error
shrinks as 1/sqrt(shots).
"""
import math

from weakmeas.montecarlo import derive_seed, empirical_stats, sample_record
from weakmeas.protocols import RegimeConfig, estimate_weak_value, run_regime
from weakmeas.weakval import theory_curve

gamma = math.pi / 4
cfg = RegimeConfig.create("erasure", 0.08, gamma)
exact = run_regime(cfg)
print(f"exact joint outcome distribution: { {k: round(v, 4) for k, v in exact.outcome_probs.items()} }")
print(f"theory A_w = {theory_curve(gamma):.4f}\n")
for shots in (300, 3000, 30000, 300000):
    rec = sample_record(exact.outcome_probs, shots, derive_seed(42, 0))
    est = estimate_weak_value(empirical_stats(rec), cfg, 0.08)
    print(f"{shots:>7} shots: A_w = {est.value.real:.4f} +/- {est.stderr:.4f}   counts {dict(rec.counts)}")
