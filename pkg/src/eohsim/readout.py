"""Destructive two-stage tunneling readout.

Stage 1 ramps a global extracting field linearly to ``F_peak`` over about
a nanosecond; electrons in the excited level escape through the thinned
barrier while ground-state electrons stay.  Stage 2 pulls every remaining
electron off its post.  A detected electron registers 0 and an empty post
registers 1.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .constants import Material
from .dynamics import is_pure, num_qubits
from .stark import PotentialSpec, Grid, solve_bound_states, stark_shifted_energy, wkb_rates

RAMP_NODES = 4001
F_SEARCH = (1e-7, 1e-3)  # V/nm
BISECT_ITER = 200
SCAN_POINTS = 61


class NoDiscriminationWindow(RuntimeError):
    """No ramp separates the two levels; ``curves`` holds (F, P0, P1) samples."""

    def __init__(self, message, curves):
        super().__init__(message)
        self.curves = curves


@dataclass(frozen=True)
class RampSpec:
    F_peak: float  # V/nm, magnitude of the extracting field
    duration: float = 1.0  # ns

    def __post_init__(self):
        if self.F_peak <= 0 or self.duration <= 0:
            raise ValueError("ramp needs F_peak > 0 and duration > 0")


@dataclass(frozen=True)
class Level:
    energy: float  # meV at zero field
    z_mean: float  # nm


@lru_cache(maxsize=None)
def zero_field_levels(material: Material, grid: Optional[Grid] = None) -> tuple[Level, Level]:
    ground, excited = solve_bound_states(PotentialSpec(material, 0.0), grid, 2)
    return Level(ground.energy, ground.z_mean), Level(excited.energy, excited.z_mean)


def _cumulative_hazard(material, energy0, z_mean, F_peak, duration_ns):
    """Times (ps) and integral of the escape rate along the linear ramp."""
    T = duration_ns * 1e3
    s = np.linspace(0.0, 1.0, RAMP_NODES)
    F = -F_peak * s
    E = stark_shifted_energy(energy0, z_mean, F)
    rate = wkb_rates(material, F, E)
    dt = T / (RAMP_NODES - 1)
    hazard = np.concatenate([[0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * dt)])
    return s * T, hazard


def escape_probability(material: Material, level_energy: float, z_mean: float, ramp: RampSpec) -> float:
    """1 - exp(-int Gamma(F(t)) dt) for a level with zero-field energy ``level_energy``."""
    _, hazard = _cumulative_hazard(material, level_energy, z_mean, ramp.F_peak, ramp.duration)
    return float(-np.expm1(-hazard[-1]))


def level_escape_probabilities(material: Material, ramp: RampSpec) -> tuple[float, float]:
    """(P escape from |0>, P escape from |1>)."""
    g, e = zero_field_levels(material)
    return (escape_probability(material, g.energy, g.z_mean, ramp),
            escape_probability(material, e.energy, e.z_mean, ramp))


@dataclass(frozen=True)
class RampDesign:
    ramp: RampSpec
    p_ground: float
    p_excited: float
    window: tuple  # (smallest F with P1 >= target, largest F with P0 <= target)

    @property
    def margin(self) -> tuple:
        return self.p_excited, 1.0 - self.p_ground


def _bisect_log(pred, lo, hi):
    """Smallest x in [lo, hi] with pred(x) true, assuming pred is monotone."""
    a, b = math.log(lo), math.log(hi)
    for _ in range(BISECT_ITER):
        m = 0.5 * (a + b)
        if pred(math.exp(m)):
            b = m
        else:
            a = m
        if b - a < 1e-12:
            break
    return math.exp(b)


def discriminating_ramp(material: Material, target_p1: float = 0.99, target_p0: float = 0.01,
                        duration: float = 1.0) -> RampDesign:
    """Extracting ramp that empties |1> with probability >= target_p1 while keeping |0>.

    The returned F_peak is the geometric centre of the window between the
    weakest ramp meeting ``target_p1`` and the strongest meeting ``target_p0``.
    """
    if not 0 < target_p0 < target_p1 < 1:
        raise ValueError("need 0 < target_p0 < target_p1 < 1")
    ground, excited = zero_field_levels(material)
    lo, hi = F_SEARCH

    def p(level, F):
        return escape_probability(material, level.energy, level.z_mean, RampSpec(F, duration))

    # P(F_peak) only rises up to the field where the linear Stark estimate
    # pushes the level back under the barrier, so bracket each edge on a
    # log scan before bisecting.
    scan = np.geomspace(lo, hi, SCAN_POINTS)
    p1 = np.array([p(excited, F) for F in scan])
    p0 = np.array([p(ground, F) for F in scan])
    hit1 = np.flatnonzero(p1 >= target_p1)
    hit0 = np.flatnonzero(p0 > target_p0)
    if hit1.size == 0 or (hit0.size and hit0[0] <= hit1[0] - 1) or p0[0] > target_p0:
        raise NoDiscriminationWindow("no discrimination window in the searched field range",
                                     list(zip(scan.tolist(), p0.tolist(), p1.tolist())))
    i1 = hit1[0]
    f1 = scan[0] if i1 == 0 else _bisect_log(lambda F: p(excited, F) >= target_p1, scan[i1 - 1], scan[i1])
    if hit0.size:
        i0 = hit0[0]
        # first field that breaks the ground-state target; step back inside
        f0 = _bisect_log(lambda F: p(ground, F) > target_p0, scan[i0 - 1], scan[i0]) * (1 - 1e-9)
    else:
        f0 = hi
    if f1 > f0:
        raise NoDiscriminationWindow(f"excited level needs F >= {f1:.3e} V/nm but ground leaks above {f0:.3e}",
                                     list(zip(scan.tolist(), p0.tolist(), p1.tolist())))
    ramp = RampSpec(math.sqrt(f1 * f0), duration)
    return RampDesign(ramp, p(ground, ramp.F_peak), p(excited, ramp.F_peak), (f1, f0))


# -- shot simulation ---------------------------------------------------------------

@dataclass
class ReadoutResult:
    stage1_events: list  # (qubit id, escape time ns)
    stage2_events: list  # (qubit id, detected)
    bits: str
    probabilities: dict  # qubit id -> stage-1 escape probability of its measured level
    levels: str = ""  # Born-sampled levels before tunneling

    def events(self, shot: int = 0):
        for qid, t in self.stage1_events:
            yield shot, qid, 1, f"escape@{t:.6f}ns"
        for qid, detected in self.stage2_events:
            yield shot, qid, 2, "detected" if detected else "missed"


def shot_rng(seed: int, shot: int) -> np.random.Generator:
    """Counter-based stream for one shot: Philox keyed by (seed, shot)."""
    if seed < 0 or shot < 0:
        raise ValueError("seed and shot index must be non-negative")
    return np.random.Generator(np.random.Philox(key=(int(seed) % 2**64) | (int(shot) << 64)))


def _sample_levels(probs: np.ndarray, n: int, order: Sequence[int], rng) -> list:
    """Sequential Born sampling with collapse, qubit by qubit in ``order``."""
    p = probs.reshape((2,) * n)
    outcome = [0] * n
    for q in order:
        marginal = p.sum(axis=tuple(i for i in range(p.ndim) if i != q)) if p.ndim > 1 else p
        total = marginal.sum()
        p1 = marginal[1] / total if total > 0 else 0.0
        bit = int(rng.random() < p1)
        outcome[q] = bit
        p = np.take(p, [bit], axis=q)
    return outcome


class Readout:
    """Precomputed escape statistics for one material and ramp."""

    def __init__(self, material: Material, ramp: RampSpec, efficiency: float = 1.0):
        if not 0 <= efficiency <= 1:
            raise ValueError("detector efficiency must lie in [0, 1]")
        self.material = material
        self.ramp = ramp
        self.efficiency = efficiency
        self.curves = []
        for level in zero_field_levels(material):
            t, hazard = _cumulative_hazard(material, level.energy, level.z_mean, ramp.F_peak, ramp.duration)
            self.curves.append((t, hazard))
        self.p_escape = tuple(float(-np.expm1(-h[-1])) for _, h in self.curves)

    def misregistration(self) -> dict:
        """Probability that a qubit prepared in |0> reads 1, and vice versa."""
        p0, p1 = self.p_escape
        eta = self.efficiency
        return {"zero_as_one": p0 + (1 - p0) * (1 - eta), "one_as_zero": (1 - p1) * eta}

    def _escape_time(self, level: int, u: float) -> float:
        t, hazard = self.curves[level]
        return float(np.interp(-math.log1p(-u), hazard, t)) * 1e-3

    def shot(self, state: np.ndarray, ids: Sequence[str], seed: int, shot: int = 0,
             order: Optional[Sequence[int]] = None) -> ReadoutResult:
        n = num_qubits(state)
        if len(ids) != n:
            raise ValueError(f"state has {n} qubits but the device has {len(ids)}")
        rng = shot_rng(seed, shot)
        probs = np.abs(state) ** 2 if is_pure(state) else np.real(np.diag(state))
        probs = np.clip(probs, 0.0, None)
        levels = _sample_levels(probs, n, range(n) if order is None else order, rng)
        stage1, stage2, bits, probabilities = [], [], [], {}
        for qid, level in zip(ids, levels):
            p = self.p_escape[level]
            probabilities[qid] = p
            u = rng.random()
            if u < p:
                stage1.append((qid, self._escape_time(level, u)))
                bits.append("1")
                continue
            detected = bool(rng.random() < self.efficiency)
            stage2.append((qid, detected))
            bits.append("0" if detected else "1")
        return ReadoutResult(stage1, stage2, "".join(bits), probabilities, "".join(map(str, levels)))

    def run(self, state: np.ndarray, ids: Sequence[str], seed: int, shots: int,
            workers: int = 1, order: Optional[Sequence[int]] = None) -> list:
        if workers <= 1:
            return [self.shot(state, ids, seed, k, order) for k in range(shots)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda k: self.shot(state, ids, seed, k, order), range(shots)))


def simulate_readout(state: np.ndarray, device, ramp: RampSpec, material: Material, seed: int = 0,
                     efficiency: float = 1.0, shot: int = 0) -> ReadoutResult:
    """One readout shot of ``state`` on the posts of ``device``."""
    return Readout(material, ramp, efficiency).shot(state, device.qubit_ids, seed, shot)


def histogram(results: Sequence[ReadoutResult]) -> dict:
    return dict(sorted(Counter(r.bits for r in results).items()))


def write_shots_csv(results: Sequence[ReadoutResult], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["shot", "qubit", "stage", "event"])
    for k, r in enumerate(results):
        for row in r.events(k):
            writer.writerow(row)
