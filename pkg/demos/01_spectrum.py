"""Bound levels of an electron above helium and how a pressing field tunes them."""
import numpy as np

from eohsim import HE3, HE4, Grid, PotentialSpec, solve_bound_states, stark_sweep, transition_frequency
from eohsim.stark import matrix_element_z

# zero-field hydrogen-like series: E_n = -R/n^2
for mat in (HE4, HE3):
    levels = solve_bound_states(PotentialSpec(mat, 0.0), n_levels=4)
    E = np.array([s.energy for s in levels])
    n = np.arange(1, 5)
    print(mat.name, "R = %.4f meV, a_B = %.3f nm" % (mat.rydberg, mat.bohr_radius))
    print("  solver  ", np.round(E, 5))
    print("  -R/n^2  ", np.round(-mat.rydberg / n**2, 5))

# transition frequency and dipole matrix element at zero field
ground, excited = solve_bound_states(PotentialSpec(HE3, 0.0))
print("he3 nu01 = %.2f GHz, <0|z|1> = %.3f nm" % (transition_frequency(PotentialSpec(HE3, 0.0)),
                                                  matrix_element_z(ground, excited)))

# the Stark sweep: fields in V/cm converted to V/nm
fields = np.linspace(0, 200, 6) * 1e-7
for row in stark_sweep(HE3, fields):
    print("F = %6.1f V/cm   nu01 = %7.2f GHz   z01 = %.3f nm" % (row.F * 1e7, row.nu01, row.z01))

# a coarser grid changes the answer only slightly
coarse = transition_frequency(PotentialSpec(HE3, 0.0), Grid(300.0, 2000))
print("coarse grid nu01 = %.3f GHz" % coarse)
