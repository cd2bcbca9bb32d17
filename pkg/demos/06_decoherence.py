"""Ripplon relaxation, magnetic confinement scales and the operations budget."""
import numpy as np

from eohsim import HE3, HE4, magnetic_scales, one_ripplon_feasible, operations_budget, t1_ripplon
from eohsim import thermal_ripplon_amplitude
from eohsim.decoherence import to_kelvin

for mat in (HE4, HE3):
    print(mat.name, "delta_T at 10 mK = %.4f nm" % thermal_ripplon_amplitude(mat, 0.01))
    for T in (0.01, 0.05, 0.1):
        print("  T = %.2f K   T1 = %.3g us" % (T, t1_ripplon(mat, T, 67.0)))

for B in (0.1, 1.5, 10.0):
    m = magnetic_scales(500.0, B)
    chk = one_ripplon_feasible(HE4, B)
    print("B = %5.1f T  Omega1 = %.3f K  Omega2 = %.3e K  q*/q_max = %.1f"
          % (B, to_kelvin(m.Omega1), to_kelvin(m.Omega2), chk.q_star / chk.q_max))

print("ops budget, 100 ms / 1 ns:", operations_budget(100.0, 1.0))
