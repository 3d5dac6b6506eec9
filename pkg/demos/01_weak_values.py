"""Weak values of the gate's system operator along the pre-selection family.

The system is prepared in cos(g)|H> + sin(g)|V> and post-selected on |+>.
The weak value of A = (I - Z)/2 leaves the [0, 1] eigenvalue range for large
g and diverges where the two states are orthogonal (g = 3pi/4).
"""
import math

import numpy as np

from weakmeas.qcore import Z
from weakmeas.weakval import A_GATE, PrePostSelection, b_operator, convert_abar_to_a, theory_curve, weak_value

print(f"{'gamma/pi':>9} {'A_w':>10} {'curve':>10} {'from Z_w':>10}")
for g in np.linspace(0, 0.7 * math.pi, 8):
    sel = PrePostSelection(g)
    aw = weak_value(A_GATE, sel).real
    via_z = convert_abar_to_a(weak_value(Z, sel)).real
    print(f"{g / math.pi:9.3f} {aw:10.4f} {theory_curve(g):10.4f} {via_z:10.4f}")

sel = PrePostSelection(math.pi / 3)
print("\nB operator for gamma = pi/3 (strong c-NOT pointer, pointer-space map):")
print(np.round(b_operator(sel), 4))
