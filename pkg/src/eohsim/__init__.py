"""Pulse-level simulator for electrons floating on liquid helium.

Internal units are nm, meV, ps and K; electric fields are in V/nm.
"""

from .constants import HE3, HE4, ConfigurationError, Material, material_params
from .decoherence import (
    lateral_confinement_frequency,
    magnetic_scales,
    one_ripplon_feasible,
    operations_budget,
    t1_ripplon,
    thermal_ripplon_amplitude,
)
from .dsl import DSLError, ParseError, Schedule, parse, render
from .dynamics import (
    RabiPulse,
    lindblad_evolve,
    lz_sweep,
    rabi_evolve,
    run_schedule,
    swap_evolve,
)
from .experiment import run_experiment
from .qubit import DeviceGeometry, QubitParams, build_qubit, coupling_strength, paper_coupling_estimate
from .readout import RampSpec, discriminating_ramp, escape_probability, simulate_readout
from .stark import (
    Grid,
    PotentialSpec,
    SolverError,
    barrier_profile,
    matrix_element_z,
    solve_bound_states,
    stark_sweep,
    transition_frequency,
    wkb_rate,
)

__version__ = "0.1.0"
