"""Seeded finite-statistics emulation of coincidence counting.

Each sweep point draws from its own stream: ``derive_seed(master, index)`` is a
splitmix64 step and keys a Philox counter-based generator, so a point's counts
depend only on (master seed, point index) and never on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .protocols import PointerStats

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# derive_seed(0, 0); the first splitmix64 output for state 0.
DERIVE_SEED_ZERO = 0xE220A8397B1DCDAF

# outcome label -> (observable, eigenvalue)
OUTCOMES = {
    "plus": ("x", 1), "minus": ("x", -1),
    "zero": ("z", 1), "one": ("z", -1),
    "phi": ("z", 1), "perp": ("z", -1),
}


def splitmix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, point_index: int) -> int:
    """splitmix64 of master + (index + 1) * golden gamma, all mod 2^64."""
    return splitmix64((master + (point_index + 1) * GOLDEN_GAMMA) & MASK64)


@dataclass(frozen=True)
class MeasurementRecord:
    counts: Mapping[str, int]
    shots: int
    seed: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not add up to shots")
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("negative count")

    @cached_property
    def derived_stats(self) -> PointerStats:
        return empirical_stats(self)


def sample_record(probs: Mapping[str, float], shots: int, seed: int) -> MeasurementRecord:
    """Multinomial draw of ``shots`` events from an outcome distribution."""
    if shots < 1:
        raise ValueError(f"shots must be at least 1, got {shots}")
    labels = sorted(probs)
    p = np.array([probs[k] for k in labels], dtype=float)
    if not labels or np.any(p < -1e-12) or not np.all(np.isfinite(p)) or abs(p.sum() - 1) > 1e-9:
        raise ValueError("invalid outcome distribution")
    p = np.clip(p, 0, None)
    p /= p.sum()
    rng = np.random.Generator(np.random.Philox(key=seed & MASK64))
    draw = rng.multinomial(shots, p)
    return MeasurementRecord({k: int(n) for k, n in zip(labels, draw)}, shots, seed)


def _split(label: str) -> tuple[str, str]:
    outcome, _, branch = label.partition("|")
    return outcome, branch or "pass"


def empirical_stats(record: MeasurementRecord) -> PointerStats:
    """Plug-in pointer expectations from post-selected counts, with binomial errors."""
    tally: dict[str, list[int]] = {}
    n_pass = 0
    for label, n in record.counts.items():
        outcome, branch = _split(label)
        if outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome label {label!r}")
        if branch != "pass":
            continue
        n_pass += n
        obs, sign = OUTCOMES[outcome]
        tally.setdefault(obs, [0, 0])[0 if sign > 0 else 1] += n

    exps = {"x": math.nan, "y": math.nan, "z": math.nan}
    stderr = {}
    for obs, (up, down) in tally.items():
        n = up + down
        if n == 0:
            continue
        e = (up - down) / n
        exps[obs] = e
        stderr[obs] = math.sqrt(max(1 - e * e, 0.0) / n)

    measured = "x" if "x" in tally else "z"
    total = sum(record.counts.values())
    return PointerStats(
        p_postselect=n_pass / total if total else math.nan,
        exp_x=exps["x"], exp_y=exps["y"], exp_z=exps["z"],
        system_fidelity=math.nan,
        outcome_probs={k: v / total for k, v in record.counts.items()},
        measured=measured,
        valid=n_pass > 0,
        stderr=stderr,
    )
