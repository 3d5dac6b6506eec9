"""The linear-optical c-phase gate, element by element.

The Jones-calculus chain reproduces the abstract gate up to a local phase on
the pointer, at a uniform coincidence success probability.
"""
import math

import numpy as np

from weakmeas import optics

phi = 0.18 * math.pi
chain = optics.build_chain(phi)
print(chain.describe())
gate, p = optics.effective_gate(chain)
print(f"\neffective gate (system-first), success probability {p:.4f}:")
print(np.round(gate, 4))
print(f"distance to D(phi) cphase(phi): {optics.gate_distance(chain):.1e}")
print("\nunbalanced basis amplitudes:", {k: round(v, 4) for k, v in optics.basis_amplitudes(
    optics.build_chain(phi, balance=False)).items()})
print("\ntwo-mode trace for the |VH> input:")
for row in optics.evaluate_chain(chain, optics.TwoPhotonAmplitudes.basis(1, 0)):
    print(f"  {row.name:>14}: norm {np.linalg.norm(row.state.amps):.4f}")
