"""State-selective tunneling readout with an extracting field ramp."""
import numpy as np

from eohsim import HE3, RampSpec, discriminating_ramp, simulate_readout
from eohsim.dynamics import basis_state
from eohsim.qubit import DeviceGeometry
from eohsim.readout import Readout, histogram, level_escape_probabilities

design = discriminating_ramp(HE3, 0.99, 0.01, duration=1.0)
lo, hi = design.window
print("window %.3g .. %.3g V/nm, F_peak = %.2f V/cm" % (lo, hi, design.ramp.F_peak * 1e7))
print("P_escape(0) = %.2e   P_escape(1) = %.10f" % (design.p_ground, design.p_excited))

# escape probability of each level as the ramp peak grows
for F in np.geomspace(1e-7, 1e-5, 5):
    p0, p1 = level_escape_probabilities(HE3, RampSpec(F, 1.0))
    print("  F_peak = %.2e V/nm   P0 = %.3e   P1 = %.3e" % (F, p0, p1))

# a Bell-like superposition read out over many shots
psi = (basis_state("01") + basis_state("10")) / np.sqrt(2)
device = DeviceGeometry(biases={"q0": 0.0, "q1": 0.0})
print("single shot:", simulate_readout(psi, device, design.ramp, HE3, seed=7))
results = Readout(HE3, design.ramp).run(psi, ["q0", "q1"], seed=7, shots=2000)
print(histogram(results))
