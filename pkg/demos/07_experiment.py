"""Run an experiment file end to end: pulses, swap, readout."""
import json
from pathlib import Path

from eohsim import parse, render, run_experiment

source = (Path(__file__).parent / "swap_readout.eoh").read_text()
print(render(parse(source)))
report, traj, shots = run_experiment(source)
print(json.dumps(report, indent=2))
for snap in traj.snapshots[:4]:
    print(snap)
