"""Qubit parameters and the dipolar coupling between neighbouring electrons."""
import numpy as np

from eohsim import HE3, build_qubit, coupling_strength, paper_coupling_estimate
from eohsim.constants import HBAR

a = build_qubit(HE3, 0.0, id="q0")
b = build_qubit(HE3, 0.0, id="q1")
print("omega01 = %.4f rad/ps  (%.2f GHz)" % (a.omega01, a.omega01 / (2 * np.pi) * 1e3))
print("z00 = %.3f nm, z11 = %.3f nm, z01 = %.3f nm" % (a.z00, a.z11, a.z01))

# g falls off as 1/d^3
for d in (250.0, 500.0, 1000.0):
    g = coupling_strength(a, b, d)
    nu = g / (2 * np.pi * HBAR) * 1e3
    print("d = %6.0f nm   g = %.3e meV  (%.4f GHz)" % (d, g, nu))

# the rough order-of-magnitude estimate, for comparison
print("estimate at 500 nm: %.3f GHz" % paper_coupling_estimate(HE3, 500.0))
