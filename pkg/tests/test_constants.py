import dataclasses
import math

import pytest
from hypothesis import given, strategies as st

from eohsim import constants as c
from eohsim.constants import HE3, HE4, ConfigurationError, Material, material_params

# Hand-entered reference values for the unit system (meV, nm, ps, K).
HBAR_REF = 0.6582120
KB_REF = 0.0861733
HBAR2_2M_REF = 38.0998
COULOMB_REF = 1439.96


def rel(a, b):
    return abs(a - b) / abs(b)


def six(x):
    return float(f"{x:.6g}")


def test_unit_constants_six_figures():
    assert six(c.HBAR) == six(HBAR_REF)
    assert six(c.KB) == six(KB_REF)
    assert six(c.HBAR2_2M) == six(HBAR2_2M_REF)
    assert six(c.COULOMB) == six(COULOMB_REF)


def test_field_unit_conversion():
    # 1 V/cm = 1e-7 V/nm; e * (1 V/nm) * (1 nm) = 1 eV = 1000 meV
    assert c.V_PER_CM == 1e-7
    assert c.E_FIELD == 1000.0


def test_ghz_round_trip():
    assert math.isclose(c.mev_to_ghz(c.ghz_to_mev(67.0)), 67.0, rel_tol=1e-14)
    assert math.isclose(c.rad_per_ps_to_ghz(c.ghz_to_rad_per_ps(0.09)), 0.09, rel_tol=1e-14)
    # h * 1 GHz = 4.135667696e-3 meV
    assert math.isclose(c.ghz_to_mev(1.0), 4.135667696e-3, rel_tol=1e-9)


def test_he3_parameters():
    m = material_params("he3")
    assert m.lam == 0.00521
    assert round(m.rydberg, 3) == 0.369
    assert round(m.bohr_radius, 2) == 10.16
    # literature value R3 = 0.37 meV
    assert abs(m.rydberg - 0.37) / 0.37 < 0.01


def test_he3_kappa_back_solved():
    m = HE3
    assert math.isclose((m.kappa - 1) / (4 * (m.kappa + 1)), m.lam, rel_tol=1e-12)
    assert abs(m.kappa - 1.0426) < 1e-4


def test_he4_parameters_hand_oracle():
    kappa = 1.0572
    lam = (kappa - 1) / (4 * (kappa + 1))
    strength = lam * COULOMB_REF
    R = strength**2 / (4 * HBAR2_2M_REF)
    aB = 2 * HBAR2_2M_REF / strength
    m = material_params("he4")
    assert m.kappa == kappa
    assert math.isclose(m.lam, lam, rel_tol=1e-12)
    assert round(m.lam, 5) == 0.00695
    assert rel(m.rydberg, R) < 1e-5 and abs(m.rydberg - 0.657) < 1e-3
    assert rel(m.bohr_radius, aB) < 1e-5 and abs(m.bohr_radius - 7.61) < 0.01


@pytest.mark.parametrize("m", [HE3, HE4])
def test_hydrogenic_identity(m):
    assert rel(m.rydberg * m.bohr_radius**2, c.HBAR2_2M) < 1e-12


def test_surface_tension_units():
    # 1 N/m = 1 J/m^2 = (1/1.602176634e-22 meV) / 1e18 nm^2
    per = 1.0 / 1.602176634e-22 / 1e18
    assert rel(HE3.sigma, 1.55e-4 * per) < 1e-12
    assert rel(HE4.sigma, 3.78e-4 * per) < 1e-12
    assert rel(HE4.sigma_si, 3.78e-4) < 1e-12


def test_unknown_material_lists_valid():
    with pytest.raises(ConfigurationError, match="he3, he4"):
        material_params("xx")


def test_material_is_immutable():
    with pytest.raises(dataclasses.FrozenInstanceError):
        HE3.lam = 0.1


@given(st.floats(1e-4, 0.05))
def test_doubling_lambda_scaling(lam):
    a = Material.from_lambda("x", lam, 1.0, 1.0)
    b = Material.from_lambda("x", 2 * lam, 1.0, 1.0)
    assert math.isclose(b.rydberg, 4 * a.rydberg, rel_tol=1e-12)
    assert math.isclose(b.bohr_radius, 0.5 * a.bohr_radius, rel_tol=1e-12)


@given(st.floats(1.001, 3.0))
def test_kappa_lambda_inverse(kappa):
    m = Material.from_kappa("x", kappa, 1.0, 1.0)
    back = Material.from_lambda("x", m.lam, 1.0, 1.0)
    assert math.isclose(back.kappa, kappa, rel_tol=1e-10)
