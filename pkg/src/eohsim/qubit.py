"""Two-level reduction of the surface states and the dipolar qubit coupling."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants import COULOMB, HBAR, PLANCK, Material
from .stark import Grid, PotentialSpec, matrix_element_z, solve_bound_states


@dataclass(frozen=True)
class DeviceGeometry:
    """Linear array of posts; ``biases`` maps qubit id to its pressing field (V/nm)."""

    pitch: float = 500.0  # nm
    film_thickness: float = 500.0  # nm
    biases: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pitch <= 0 or self.film_thickness <= 0:
            raise ValueError("pitch and film thickness must be positive")

    @property
    def qubit_ids(self) -> list:
        return list(self.biases)

    def separation(self, a, b) -> float:
        ids = self.qubit_ids
        return self.pitch * abs(ids.index(a) - ids.index(b))


@dataclass(frozen=True)
class QubitParams:
    id: str
    omega01: float  # rad/ps
    z00: float  # nm
    z01: float  # nm
    z11: float  # nm
    bias: float  # V/nm
    z2_diff: float = 0.0  # <1|z^2|1> - <0|z^2|0>, nm^2

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "QubitParams":
        return cls(**json.loads(text))


def build_qubit(material: Material, bias: float = 0.0, grid: Grid | None = None, id: str = "q") -> QubitParams:
    ground, excited = solve_bound_states(PotentialSpec(material, bias), grid, 2)
    omega = (excited.energy - ground.energy) / HBAR
    return QubitParams(
        id=id,
        omega01=omega,
        z00=matrix_element_z(ground, ground),
        z01=matrix_element_z(ground, excited),
        z11=matrix_element_z(excited, excited),
        bias=bias,
        z2_diff=float(np.sum((excited.psi**2 - ground.psi**2) * ground.z**2) * ground.spacing),
    )


def coupling_strength(a: QubitParams, b: QubitParams, d: float) -> float:
    """|01> <-> |10> matrix element g in meV.

    Projecting the cross term -(e^2/4 pi eps0 d^3) z_a z_b of the dipolar
    interaction onto the two-level bases leaves g = e^2 z01_a z01_b / (4 pi eps0 d^3).
    """
    if d <= 0:
        raise ValueError("separation must be positive")
    return COULOMB * abs(a.z01) * abs(b.z01) / d**3


def static_shifts(qubits: dict, device: DeviceGeometry) -> dict:
    """Resonance renormalisation of each qubit (rad/ps) from the diagonal dipolar terms.

    Every neighbour is taken in its ground state.  For the pair term
    (e^2/8 pi eps0 d^3)(z_a - z_b)^2 this gives, for qubit a,
    (e^2/4 pi eps0 d^3) [ (<z^2>_1 - <z^2>_0)/2 - (z11 - z00) z00_b ].
    """
    shifts = {}
    for a, qa in qubits.items():
        total = 0.0
        for b, qb in qubits.items():
            if b == a:
                continue
            pref = COULOMB / device.separation(a, b) ** 3
            total += pref * (0.5 * qa.z2_diff - (qa.z11 - qa.z00) * qb.z00)
        shifts[a] = total / HBAR
    return shifts


def paper_coupling_estimate(material: Material, d: float) -> float:
    """First-order magnitude e^2 a_B^2 / (4 pi eps0 d^3 h) in GHz."""
    if d <= 0:
        raise ValueError("separation must be positive")
    return COULOMB * material.bohr_radius**2 / d**3 / PLANCK * 1e3
