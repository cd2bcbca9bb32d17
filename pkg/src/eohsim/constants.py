"""Unit system, physical constants and helium material records.

Internal units
--------------
length       nm
energy       meV
time         ps
temperature  K
field        V/nm   (1 V/cm = 1e-7 V/nm)
magnetic     T
charge       e

With these choices ``e * F * z`` for ``F`` in V/nm and ``z`` in nm is
``1000 * F * z`` meV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants as _c

# CODATA values via scipy, converted once to internal units.
HBAR = _c.hbar / _c.e * 1e3 * 1e12  # meV ps
PLANCK = 2.0 * math.pi * HBAR  # meV ps
KB = _c.k / _c.e * 1e3  # meV / K
HBAR2_2M = _c.hbar**2 / (2.0 * _c.m_e) / _c.e * 1e3 * 1e18  # meV nm^2
COULOMB = _c.e / (4.0 * math.pi * _c.epsilon_0) * 1e3 * 1e9  # e^2/4pi eps0 in meV nm
E_FIELD = 1000.0  # meV per (V/nm * nm)
E_OVER_M = _c.e / _c.m_e * 1e-12  # rad/ps per tesla

V_PER_CM = 1e-7  # V/nm
MEV_PER_GHZ = PLANCK * 1e-3  # energy of a 1 GHz quantum
N_PER_M_TO_MEV_PER_NM2 = 1.0 / _c.e * 1e3 * 1e-18


def ghz_to_mev(nu_ghz: float) -> float:
    return nu_ghz * MEV_PER_GHZ


def mev_to_ghz(energy_mev: float) -> float:
    return energy_mev / MEV_PER_GHZ


def ghz_to_rad_per_ps(nu_ghz: float) -> float:
    return 2.0 * math.pi * nu_ghz * 1e-3


def rad_per_ps_to_ghz(omega: float) -> float:
    return omega / (2.0 * math.pi) * 1e3


class ConfigurationError(ValueError):
    """Invalid physical configuration (unknown material, inconsistent rates...)."""


@dataclass(frozen=True)
class Material:
    """Dielectric and surface parameters of a liquid helium isotope.

    ``sigma`` is stored in meV/nm^2 and ``rho`` in kg/m^3; ``rydberg`` and
    ``bohr_radius`` follow from ``lam`` alone.
    """

    name: str
    kappa: float
    lam: float
    sigma: float
    rho: float

    @classmethod
    def from_kappa(cls, name: str, kappa: float, sigma: float, rho: float) -> "Material":
        return cls(name, kappa, (kappa - 1.0) / (4.0 * (kappa + 1.0)), sigma, rho)

    @classmethod
    def from_lambda(cls, name: str, lam: float, sigma: float, rho: float) -> "Material":
        # inverse of lam = (k - 1) / (4 (k + 1))
        kappa = (1.0 + 4.0 * lam) / (1.0 - 4.0 * lam)
        return cls(name, kappa, lam, sigma, rho)

    @property
    def image_strength(self) -> float:
        """Coefficient of the -1/z image potential, meV nm."""
        return self.lam * COULOMB

    @property
    def rydberg(self) -> float:
        """Effective Rydberg energy R in meV."""
        return self.image_strength**2 / (4.0 * HBAR2_2M)

    @property
    def bohr_radius(self) -> float:
        """Effective Bohr radius a_B in nm."""
        return 2.0 * HBAR2_2M / self.image_strength

    @property
    def sigma_si(self) -> float:
        return self.sigma / N_PER_M_TO_MEV_PER_NM2

    @property
    def capillary_speed(self) -> float:
        """sqrt(sigma / rho) in nm^(3/2)/ps, the prefactor of the ripplon dispersion."""
        # m^3/s^2 -> nm^3/ps^2 is a factor 1e27 / 1e24
        return math.sqrt(self.sigma_si / self.rho * 1e3)


# Literature surface tensions (N/m) and densities (kg/m^3) near T = 0:
# 3He sigma = 1.55e-4, rho = 82; 4He sigma = 3.78e-4, rho = 145.
# 4He dielectric constant kappa = 1.0572.
HE3 = Material.from_lambda("he3", 0.00521, 1.55e-4 * N_PER_M_TO_MEV_PER_NM2, 82.0)
HE4 = Material.from_kappa("he4", 1.0572, 3.78e-4 * N_PER_M_TO_MEV_PER_NM2, 145.0)

MATERIALS = {"he3": HE3, "he4": HE4}


def material_params(name: str) -> Material:
    try:
        return MATERIALS[name]
    except KeyError:
        valid = ", ".join(sorted(MATERIALS))
        raise ConfigurationError(f"unknown material {name!r}; valid materials: {valid}") from None
