"""Ripplon-limited relaxation, lateral/Landau energy scales and the operation budget."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .constants import COULOMB, E_OVER_M, HBAR, HBAR2_2M, KB, Material

DEFAULT_T2_MS = 100.0


@dataclass(frozen=True)
class DecoherenceParams:
    temperature: float  # K
    delta_T: float  # nm
    delta_nu: float  # GHz
    T1: float  # us, math.inf when relaxation is absent
    T2: float = DEFAULT_T2_MS  # ms

    def __post_init__(self):
        if self.temperature <= 0 or self.delta_T < 0 or self.T1 <= 0:
            raise ValueError("need T > 0, delta_T >= 0, T1 > 0")


@dataclass(frozen=True)
class MagneticConfig:
    B: float  # T
    omega_c: float  # rad/ps
    Omega1: float  # rad/ps
    Omega2: float  # rad/ps
    omega_p: float  # rad/ps


@dataclass(frozen=True)
class RipplonCheck:
    feasible: bool
    q_star: float  # 1/nm
    q_max: float  # 1/nm


def thermal_ripplon_amplitude(material: Material, T: float) -> float:
    """rms thermal surface displacement sqrt(k_B T / sigma) in nm."""
    if T < 0:
        raise ValueError("temperature must be non-negative")
    return math.sqrt(KB * T / material.sigma)


def t1_from_ratio(delta_nu: float, ratio: float) -> float:
    """T1 = 1 / (delta_nu * ratio^2) in us for delta_nu in GHz."""
    if ratio == 0:
        return math.inf
    return 1e-3 / (delta_nu * ratio**2)


def t1_ripplon(material: Material, T: float, delta_nu: float, a_B: float | None = None) -> float:
    if T <= 0 or delta_nu <= 0:
        raise ValueError("need T > 0 and delta_nu > 0")
    a_B = material.bohr_radius if a_B is None else a_B
    return t1_from_ratio(delta_nu, thermal_ripplon_amplitude(material, T) / a_B)


def decoherence_params(material: Material, T: float, delta_nu: float, T2: float = DEFAULT_T2_MS) -> DecoherenceParams:
    dT = thermal_ripplon_amplitude(material, T)
    return DecoherenceParams(T, dT, delta_nu, t1_ripplon(material, T, delta_nu), T2)


def lateral_confinement_frequency(d: float) -> float:
    """Omega_1 = sqrt(e^2 / (4 pi eps0 m d^3)) in rad/ps."""
    if d <= 0:
        raise ValueError("separation must be positive")
    # 1/m = 2 (hbar^2/2m) / hbar^2
    return math.sqrt(COULOMB * 2.0 * HBAR2_2M / HBAR**2 / d**3)


def to_kelvin(omega: float) -> float:
    """hbar * omega / k_B."""
    return HBAR * omega / KB


def cyclotron_frequency(B: float) -> float:
    return E_OVER_M * B


def magnetic_scales(d: float, B: float) -> MagneticConfig:
    """Landau-level scales; the plasma frequency is stood in for by Omega_1(d)."""
    if B <= 0:
        raise ValueError("B must be positive")
    omega_c = cyclotron_frequency(B)
    omega_p = lateral_confinement_frequency(d)
    Omega2 = 2.0 * math.pi * omega_p**2 / omega_c
    return MagneticConfig(B, omega_c, omega_p, Omega2, omega_p)


def ripplon_frequency(material: Material, q: float) -> float:
    """Capillary dispersion sqrt(sigma/rho) q^(3/2), rad/ps for q in 1/nm."""
    return material.capillary_speed * q**1.5


def magnetic_length(B: float) -> float:
    """sqrt(hbar / eB) in nm."""
    # hbar/(eB) = hbar / (m omega_c) = 2 (hbar^2/2m) / (hbar omega_c)
    return math.sqrt(2.0 * HBAR2_2M / (HBAR * cyclotron_frequency(B)))


def one_ripplon_feasible(material: Material, B: float) -> RipplonCheck:
    """Can one ripplon carry both the Landau energy hbar*omega_c and the momentum?

    q* solves ripplon_frequency(q*) = omega_c; the electron can only absorb
    momenta up to the inverse magnetic length.
    """
    if B <= 0:
        raise ValueError("B must be positive")
    q_star = (cyclotron_frequency(B) / material.capillary_speed) ** (2.0 / 3.0)
    q_max = 1.0 / magnetic_length(B)
    return RipplonCheck(q_star <= q_max, q_star, q_max)


def operations_budget(T2_ms: float, t_op_ns: float) -> int:
    if T2_ms <= 0 or t_op_ns <= 0:
        raise ValueError("T2 and t_op must be positive")
    # round first so 100 ms / 1 us lands on 1e5 rather than 99999
    return math.floor(round(T2_ms * 1e6 / t_op_ns, 9))


def report(material: Material, T: float, B: float, d: float, delta_nu: float,
           T2_ms: float = DEFAULT_T2_MS, t_op_ns: float = 1.0) -> dict:
    """Summary keyed as in the ``decoherence`` CLI output."""
    mag = magnetic_scales(d, B)
    return {
        "delta_T_nm": thermal_ripplon_amplitude(material, T),
        "T1_us": t1_ripplon(material, T, delta_nu),
        "Omega1_K": to_kelvin(mag.Omega1),
        "omega_c_rad_s": mag.omega_c * 1e12,
        "Omega2_K": to_kelvin(mag.Omega2),
        "one_ripplon_feasible": one_ripplon_feasible(material, B).feasible,
        "ops_budget": operations_budget(T2_ms, t_op_ns),
    }
