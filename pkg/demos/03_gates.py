"""Rabi pulses, the dipolar swap and a Landau-Zener sweep."""
import numpy as np

from eohsim import HE3, RabiPulse, build_qubit, coupling_strength, lz_sweep, rabi_evolve, swap_evolve
from eohsim.dynamics import basis_state, landau_zener_probability, lz_rate_for_probability, populations, rabi_frequency, swap_time

q = build_qubit(HE3, 0.0, id="q0")
E_rf = 1e-7  # 1 V/cm
omega = rabi_frequency(q, E_rf)
t_pi = np.pi / omega
print("Rabi frequency %.4e rad/ps, pi pulse %.1f ps" % (omega, t_pi))

# population of |1> across a Rabi period
psi0 = basis_state("0")
for frac in (0.25, 0.5, 1.0, 2.0):
    psi = rabi_evolve(psi0, q, RabiPulse("q0", E_rf, frac * t_pi))
    print("  t = %.2f t_pi   P1 = %.4f" % (frac, populations(psi)[1]))

# swap |01> -> |10> at the resonant exchange time
g = coupling_strength(q, q, 500.0)
t_sw = swap_time(g)
psi = swap_evolve(basis_state("01"), g, 0.0, t_sw)
print("swap after %.0f ps: P(10) = %.6f" % (t_sw, populations(psi)[2]))

# Landau-Zener: diabatic passage probability against the closed form
for p in (0.1, 0.5, 0.9):
    rate = lz_rate_for_probability(g, p)  # meV/ps
    res = lz_sweep(basis_state("01"), g, rate)
    print("rate %.1e meV/ps  1-transfer = %.4f  exp(...) = %.4f"
          % (rate, 1 - res.transfer, landau_zener_probability(g, rate)))
