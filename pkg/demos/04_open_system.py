"""Relaxation and dephasing of a single qubit via the Lindblad equation."""
import numpy as np

from eohsim import lindblad_evolve
from eohsim.dynamics import basis_state, to_density

T1, T2 = 10.0, 0.015  # us, ms
H = np.zeros((2, 2))
rho_e = to_density(basis_state("1"))
plus = (basis_state("0") + basis_state("1")) / np.sqrt(2)
rho_p = to_density(plus)

# excited population decays as exp(-t/T1); coherence as exp(-t/T2)
for t_us in (0.0, 5.0, 10.0, 20.0):
    t = t_us * 1e6
    P1 = lindblad_evolve(rho_e, H, T1, T2, t)[1, 1].real
    coh = abs(lindblad_evolve(rho_p, H, T1, T2, t)[0, 1])
    print("t = %5.1f us   P1 = %.4f (%.4f)   |rho01| = %.4f (%.4f)"
          % (t_us, P1, np.exp(-t_us / T1), coh, 0.5 * np.exp(-t_us / (T2 * 1e3))))
