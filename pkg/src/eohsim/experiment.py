"""Parse -> evolve -> read out, as one call."""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import dsl
from .constants import V_PER_CM, Material, material_params
from .dynamics import populations, run_schedule
from .readout import Readout, RampSpec, discriminating_ramp, histogram

AUTO_TARGETS = (0.99, 0.01)


def resolve_ramp(material: Material, fpeak_v_per_cm: Optional[float], duration_ns: float = 1.0) -> RampSpec:
    """Explicit ramp, or the discriminating one when ``fpeak`` is None."""
    if fpeak_v_per_cm is None:
        return discriminating_ramp(material, *AUTO_TARGETS, duration=duration_ns).ramp
    return RampSpec(fpeak_v_per_cm * V_PER_CM, duration_ns)


def basis_labels(n: int) -> list:
    return [format(i, f"0{n}b") for i in range(2**n)]


def run_experiment(source: str, *, shots: Optional[int] = None, seed: Optional[int] = None,
                   material: Optional[Material] = None, open_system: bool = False,
                   t1_us: Optional[float] = None, efficiency: float = 1.0, workers: int = 1):
    """Run an ``.eoh`` program and return (report dict, trajectory, readout results).

    ``shots`` and ``seed`` override the program's readout statement.  When the
    program has no readout statement and no shots are requested, the report
    holds the final state only.
    """
    schedule = dsl.parse(source)
    material = material or material_params(schedule.header.material)
    traj = run_schedule(schedule, material=material, open_system=open_system, t1_us=t1_us)
    ids = schedule.qubit_ids
    pops = populations(traj.final)
    report = {
        "material": material.name,
        "qubits": ids,
        "mode": schedule.header.mode,
        "open_system": open_system,
        "total_time_ps": traj.total_time,
        "n_events": len(schedule.events),
        "final_populations": {b: float(p) for b, p in zip(basis_labels(len(ids)), pops)},
    }
    spec = schedule.readout
    if spec is None and shots is None:
        return report, traj, []
    spec = spec or dsl.Readout()
    n_shots = spec.shots if shots is None else shots
    n_seed = spec.seed if seed is None else seed
    ramp = resolve_ramp(material, spec.fpeak, spec.duration)
    reader = Readout(material, ramp, efficiency)
    results = reader.run(traj.final, ids, n_seed, n_shots, workers)
    report["readout"] = {
        "F_peak_V_per_cm": ramp.F_peak / V_PER_CM,
        "duration_ns": ramp.duration,
        "efficiency": efficiency,
        "seed": n_seed,
        "shots": n_shots,
        "p_escape": {"0": reader.p_escape[0], "1": reader.p_escape[1]},
        "misregistration": reader.misregistration(),
        "bits_histogram": histogram(results),
        "bit_one_frequency": {q: float(np.mean([r.bits[k] == "1" for r in results])) if results else 0.0
                              for k, q in enumerate(ids)},
    }
    return report, traj, results
