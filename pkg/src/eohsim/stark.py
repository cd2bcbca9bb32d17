"""Surface-bound electron in the image potential plus a normal field.

The 1D problem on z > 0 is

    -(hbar^2/2m) psi'' + (-Lambda e^2/4pi eps0 / z + e F z) psi = E psi

with a hard wall at z = 0.  Bound states (F >= 0) come from a 3-point finite
difference Hamiltonian on a uniform grid; extracting fields (F < 0) are
handled through WKB barrier actions.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .constants import E_FIELD, HBAR, HBAR2_2M, PLANCK, Material

MAX_EXTENSIONS = 3
EXTENSION_FACTOR = 1.5
TAIL_TOLERANCE = 1e-6


class SolverError(RuntimeError):
    """Raised when the bound-state problem cannot be solved as posed."""


class GridError(SolverError):
    """The grid is too short to contain the requested levels."""


@dataclass(frozen=True)
class PotentialSpec:
    material: Material
    field: float = 0.0  # V/nm, negative = extracting

    def potential(self, z):
        z = np.asarray(z, dtype=float)
        return -self.material.image_strength / z + E_FIELD * self.field * z


@dataclass(frozen=True)
class Grid:
    z_max: float = 300.0
    n_points: int = 6000

    def __post_init__(self):
        if self.z_max <= 0:
            raise ValueError("z_max must be positive")
        if self.n_points < 100:
            raise ValueError("n_points must be at least 100")

    @property
    def spacing(self) -> float:
        return self.z_max / self.n_points

    def interior(self) -> np.ndarray:
        return self.spacing * np.arange(1, self.n_points)

    def extended(self, factor: float = EXTENSION_FACTOR) -> "Grid":
        # keep the spacing fixed so the discretisation error does not grow
        n = int(round(self.n_points * factor))
        return Grid(self.spacing * n, n)


@dataclass(frozen=True, eq=False)
class BoundState:
    index: int
    energy: float  # meV
    psi: np.ndarray = field(repr=False)
    z: np.ndarray = field(repr=False)
    z_mean: float = 0.0

    @property
    def spacing(self) -> float:
        return float(self.z[1] - self.z[0])


def _hamiltonian_bands(spec: PotentialSpec, grid: Grid):
    z = grid.interior()
    dz = grid.spacing
    kinetic = HBAR2_2M / dz**2
    diag = 2.0 * kinetic + spec.potential(z)
    off = np.full(z.size - 1, -kinetic)
    return z, diag, off


def _solve_on(spec: PotentialSpec, grid: Grid, n_levels: int):
    z, diag, off = _hamiltonian_bands(spec, grid)
    energies, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))
    dz = grid.spacing
    vecs = vecs / math.sqrt(dz)
    # fix the sign so every wavefunction starts positive near the wall
    vecs *= np.where(vecs[0] < 0, -1.0, 1.0)
    return z, energies, vecs


def _tail_ratio(vecs: np.ndarray) -> float:
    return float(np.max(np.abs(vecs[-1]) / np.max(np.abs(vecs), axis=0)))


def solve_bound_states(spec: PotentialSpec, grid: Grid | None = None, n_levels: int = 2) -> list[BoundState]:
    """Lowest ``n_levels`` eigenstates of the surface potential.

    The grid is lengthened (same spacing) up to three times by a factor 1.5
    when a wavefunction has not decayed to 1e-6 of its peak at the far wall.
    """
    if spec.field < 0:
        raise SolverError("extracting field has no bound states; use wkb_rate for extracting fields")
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    grid = grid or Grid()

    for attempt in range(MAX_EXTENSIONS + 1):
        z, energies, vecs = _solve_on(spec, grid, n_levels)
        tail = _tail_ratio(vecs)
        if tail <= TAIL_TOLERANCE:
            break
        if attempt < MAX_EXTENSIONS:
            grid = grid.extended()
    else:
        raise GridError(
            f"wavefunction tail {tail:.2e} of peak at z_max={grid.z_max:.1f} nm after "
            f"{MAX_EXTENSIONS} extensions; increase z_max"
        )

    dz = grid.spacing
    states = []
    for k in range(n_levels):
        psi = vecs[:, k]
        # boundary values are zero so the trapezoid rule reduces to a plain sum
        z_mean = float(np.sum(z * psi**2) * dz)
        states.append(BoundState(k + 1, float(energies[k]), psi, z, z_mean))
    return states


def transition_frequency(spec: PotentialSpec, grid: Grid | None = None) -> float:
    """(E2 - E1)/h in GHz."""
    s1, s2 = solve_bound_states(spec, grid, 2)
    return level_spacing_ghz(s1, s2)


def level_spacing_ghz(lower: BoundState, upper: BoundState) -> float:
    return (upper.energy - lower.energy) / PLANCK * 1e3


def overlap(a: BoundState, b: BoundState) -> float:
    _check_same_grid(a, b)
    return float(np.sum(a.psi * b.psi) * a.spacing)


def matrix_element_z(a: BoundState, b: BoundState) -> float:
    """<a|z|b> in nm."""
    _check_same_grid(a, b)
    return float(np.sum(a.psi * a.z * b.psi) * a.spacing)


def _check_same_grid(a: BoundState, b: BoundState) -> None:
    if a.z.shape != b.z.shape or a.z[-1] != b.z[-1]:
        raise ValueError("states come from different grids")


def node_count(state: BoundState, rel_tol: float = 1e-6) -> int:
    """Interior sign changes, ignoring the numerically zero tail."""
    psi = state.psi
    significant = psi[np.abs(psi) > rel_tol * np.max(np.abs(psi))]
    return int(np.count_nonzero(np.diff(np.sign(significant))))


# -- Stark sweeps -------------------------------------------------------------

SWEEP_HEADER = ("F_V_per_nm", "E1_meV", "E2_meV", "nu01_GHz", "z01_nm")


class SweepRow(NamedTuple):
    F: float
    E1: float
    E2: float
    nu01: float
    z01: float


def _sweep_point(material: Material, F: float, grid: Grid | None) -> SweepRow:
    try:
        s1, s2 = solve_bound_states(PotentialSpec(material, F), grid, 2)
    except SolverError as exc:
        raise SolverError(f"sweep point F={F!r} V/nm failed: {exc}") from exc
    return SweepRow(F, s1.energy, s2.energy, level_spacing_ghz(s1, s2), abs(matrix_element_z(s1, s2)))


def stark_sweep(material: Material, fields: Iterable[float], grid: Grid | None = None, workers: int = 1) -> list[SweepRow]:
    fields = list(fields)
    if any(F < 0 for F in fields):
        raise SolverError("stark_sweep needs pressing fields (F >= 0); use wkb_rate for extracting fields")
    if workers <= 1:
        return [_sweep_point(material, F, grid) for F in fields]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda F: _sweep_point(material, F, grid), fields))


def write_sweep_csv(rows: Sequence[SweepRow], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])


# -- extracting fields ---------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(256)


@dataclass(frozen=True)
class BarrierProfile:
    z_inner: float
    z_outer: float
    action: float  # meV ps
    suppressed: bool = False


def stark_shifted_energy(energy0: float, z_mean: float, F: float) -> float:
    """Quasi-static first-order level energy E(0) + e F <z>."""
    return energy0 + E_FIELD * F * z_mean


def _turning_points(strength, pull, E):
    """Roots of V(z) = E for V = -strength/z - pull*z (pull = e|F| > 0)."""
    disc = E * E - 4.0 * pull * strength
    ok = (disc > 0) & (E < 0)
    root = np.sqrt(np.where(ok, disc, 0.0))
    inner = (-E - root) / (2.0 * pull)
    outer = (-E + root) / (2.0 * pull)
    return inner, outer, ok


def _barrier_actions(material: Material, F, E):
    """Vectorised WKB action over arrays of extracting fields and energies."""
    F = np.asarray(F, dtype=float)
    E = np.asarray(E, dtype=float)
    pull = E_FIELD * np.abs(F)
    inner, outer, ok = _turning_points(material.image_strength, np.where(pull > 0, pull, 1.0), E)
    ok = ok & (pull > 0)
    a = np.where(ok, inner, 0.0)[..., None]
    b = np.where(ok, outer, 1.0)[..., None]
    # z = a + (b-a)(1-cos t)/2 removes both square-root endpoint singularities:
    # V - E = pull (z-a)(b-z)/z and (z-a)(b-z) = ((b-a)/2)^2 sin^2 t
    theta = 0.5 * math.pi * (_GL_NODES + 1.0)
    zq = a + 0.5 * (b - a) * (1.0 - np.cos(theta))
    integral = 0.25 * (b[..., 0] - a[..., 0]) ** 2 * (0.5 * math.pi) * np.sum(
        _GL_WEIGHTS * np.sin(theta) ** 2 / np.sqrt(zq), axis=-1
    )
    # sqrt(2m (V-E)) = hbar sqrt((V-E) / (hbar^2/2m))
    action = HBAR * np.sqrt(np.where(ok, pull, 0.0) / HBAR2_2M) * integral
    # zero field: the barrier never closes, so nothing tunnels
    action = np.where(ok, action, np.where(pull > 0, 0.0, np.inf))
    return np.where(ok, inner, np.nan), np.where(ok, outer, np.nan), action, ~ok & (pull > 0)


def barrier_profile(spec: PotentialSpec, E: float) -> BarrierProfile:
    """Turning points and action S = int sqrt(2m(V-E)) dz under the barrier."""
    if spec.field >= 0:
        raise SolverError("barrier_profile needs an extracting field (F < 0)")
    inner, outer, action, suppressed = _barrier_actions(spec.material, spec.field, E)
    if suppressed:
        return BarrierProfile(math.nan, math.nan, 0.0, True)
    return BarrierProfile(float(inner), float(outer), float(action), False)


def attempt_frequency(E: float) -> float:
    """|E|/h in 1/ps."""
    return abs(E) / PLANCK


def wkb_rate(spec: PotentialSpec, E: float, attempt: float | None = None) -> float:
    """Tunneling rate nu_a exp(-2S/hbar) in 1/ps."""
    profile = barrier_profile(spec, E)
    nu = attempt_frequency(E) if attempt is None else attempt
    return nu * math.exp(-2.0 * profile.action / HBAR)


def wkb_rates(material: Material, F, E, attempt=None) -> np.ndarray:
    """Array version of :func:`wkb_rate` used by the readout ramps."""
    _, _, action, _ = _barrier_actions(material, F, E)
    nu = np.abs(np.asarray(E, dtype=float)) / PLANCK if attempt is None else attempt
    return nu * np.exp(-2.0 * action / HBAR)
