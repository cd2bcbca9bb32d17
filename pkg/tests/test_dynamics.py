import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from eohsim import dsl
from eohsim.constants import HBAR, HE3, ConfigurationError, V_PER_CM
from eohsim.dynamics import (
    EXCITED,
    RabiPulse,
    basis_state,
    check_state,
    ground_state,
    landau_zener_probability,
    lindblad_evolve,
    liouvillian,
    liouvillian_stack,
    lz_rate_for_probability,
    lz_sweep,
    populations,
    qubit_collapse_ops,
    rabi_evolve,
    rabi_frequency,
    rabi_hamiltonian,
    rk4_propagator,
    rk4_propagator_td,
    run_schedule,
    step_count,
    swap_evolve,
    swap_time,
    to_density,
)
from eohsim.qubit import coupling_strength


@pytest.fixture(scope="module")
def g(he3_qubit):
    return coupling_strength(he3_qubit, he3_qubit, 500.0)


def pi_duration(q, E_rf):
    return math.pi / rabi_frequency(q, E_rf)


# -- Rabi -----------------------------------------------------------------------

def test_pi_pulse_amplitudes(he3_qubit):
    E = 1e-7
    out = rabi_evolve(ground_state(1), he3_qubit, RabiPulse("q", E, pi_duration(he3_qubit, E)))
    assert np.allclose(out, [0, -1j], atol=1e-9)


def test_zero_duration_identity(he3_qubit):
    psi = np.array([0.6, 0.8j])
    assert np.array_equal(rabi_evolve(psi, he3_qubit, RabiPulse("q", 1e-7, 0.0)), psi)


def test_rabi_matches_eq_for_any_angle(he3_qubit):
    E = 2e-7
    Omega = rabi_frequency(he3_qubit, E)
    for theta in (0.3, 1.0, 2.0, 5.0):
        out = rabi_evolve(ground_state(1), he3_qubit, RabiPulse("q", E, theta / Omega))
        assert np.allclose(out, [math.cos(theta / 2), -1j * math.sin(theta / 2)], atol=1e-9)


def test_generalized_rabi(he3_qubit):
    E = 1e-7
    Omega = rabi_frequency(he3_qubit, E)
    Wp = math.sqrt(2) * Omega
    ts = np.linspace(0, 2 * math.pi / Wp, 9)[1:]
    p = [populations(rabi_evolve(ground_state(1), he3_qubit, RabiPulse("q", E, t, Omega)))[1] for t in ts]
    analytic = 0.5 * np.sin(Wp * ts / 2) ** 2
    assert np.max(np.abs(np.array(p) - analytic)) < 1e-6
    t_half = math.pi / Wp
    peak = populations(rabi_evolve(ground_state(1), he3_qubit, RabiPulse("q", E, t_half, Omega)))[1]
    assert abs(peak - 0.5) < 1e-6


def test_time_reversal(he3_qubit):
    psi = np.array([0.6, 0.8j])
    fwd = rabi_evolve(psi, he3_qubit, RabiPulse("q", 1.3e-7, 1500.0))
    back = rabi_evolve(fwd, he3_qubit, RabiPulse("q", -1.3e-7, 1500.0))
    assert np.allclose(back, psi, atol=1e-8)


def test_unknown_qubit(he3_qubit):
    with pytest.raises(KeyError):
        rabi_evolve(ground_state(1), he3_qubit, RabiPulse("nope", 1e-7, 1.0))


def test_rabi_targets_right_qubit(he3_qubit):
    qs = {"a": he3_qubit, "b": he3_qubit}
    out = rabi_evolve(ground_state(2), qs, RabiPulse("b", 1e-7, pi_duration(he3_qubit, 1e-7)))
    assert populations(out)[1] == pytest.approx(1.0, abs=1e-9)  # |01>


def test_fourth_order_convergence():
    H = rabi_hamiltonian(0.05, 0.03)
    A = -1j / HBAR * H
    T = 400.0
    exact = expm(A * T)
    errs = [np.max(np.abs(rk4_propagator(A, T, n) - exact)) for n in (40, 80, 160)]
    assert errs[0] / errs[1] >= 8 and errs[1] / errs[2] >= 8


def test_norm_drift_million_steps():
    H = rabi_hamiltonian(0.02, 0.01)
    A = -1j / HBAR * H
    rate = np.max(np.abs(np.linalg.eigvals(A)))
    # duration at which the step rule asks for 1e6 steps
    T = 1e6 * 0.005 / rate
    assert step_count(T, rate) == 10**6
    psi = rk4_propagator(A, T) @ np.array([1, 0], dtype=complex)
    assert abs(np.vdot(psi, psi).real - 1) < 1e-9


def test_step_rule_minimum():
    assert step_count(1.0, 1e-9) == 1000
    assert step_count(0.0, 1.0) == 0


def test_td_propagator_constant_matches():
    A = -1j / HBAR * rabi_hamiltonian(0.05, 0.02)
    gen = lambda t: np.broadcast_to(A, (np.size(t), 2, 2))
    assert np.allclose(rk4_propagator_td(gen, 0.0, 300.0, 5000), rk4_propagator(A, 300.0, 5000), atol=1e-12)


# -- swap -------------------------------------------------------------------------

def test_swap_full_transfer(g):
    out = swap_evolve(basis_state("01"), g, 0.0, swap_time(g))
    assert populations(out)[2] > 1 - 1e-6
    assert abs(np.vdot(out, out).real - 1) < 1e-9


def test_swap_time_hand(g):
    assert swap_time(g) == pytest.approx(math.pi * 0.6582120 / (2 * g), rel=1e-6)


def test_swap_zero_time(g):
    psi = (basis_state("01") + 1j * basis_state("11")) / math.sqrt(2)
    assert np.allclose(swap_evolve(psi, g, 0.0, 0.0), psi, atol=1e-15)


def test_swap_leakage_full_mode(g, he3_qubit):
    w = he3_qubit.omega01
    bound = 4 * g**2 / (4 * g**2 + (2 * HBAR * w) ** 2)  # two-level Rabi maximum
    worst = 0.0
    for t in np.linspace(0, swap_time(g), 7)[1:]:
        out = swap_evolve(basis_state("00"), g, 0.0, t, mode="full", omega01=w)
        worst = max(worst, populations(out)[3])
    assert worst < 1e-4
    assert worst <= bound * (1 + 1e-3)


def test_swap_full_mode_still_swaps(g, he3_qubit):
    out = swap_evolve(basis_state("01"), g, 0.0, swap_time(g), mode="full", omega01=he3_qubit.omega01)
    assert populations(out)[2] > 1 - 1e-5


def test_swap_detuned_oracle(g):
    # two-level exchange with detuning: P = (2g)^2/((2g)^2+(hbar d)^2) sin^2(W t/2)
    d = 2 * g / HBAR
    t = 900.0
    W = math.sqrt((2 * g) ** 2 + (HBAR * d) ** 2) / HBAR
    p = (2 * g) ** 2 / ((2 * g) ** 2 + (HBAR * d) ** 2) * math.sin(W * t / 2) ** 2
    out = swap_evolve(basis_state("01"), g, d, t)
    assert populations(out)[2] == pytest.approx(p, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 5000), st.floats(-1e-3, 1e-3), st.integers(0, 3), st.floats(0, 2 * math.pi))
def test_swap_unitarity_and_phase(t, det, k, phase):
    g = 3.7e-4
    psi = basis_state(format(k, "02b"))
    a = swap_evolve(psi, g, det, t)
    b = swap_evolve(np.exp(1j * phase) * psi, g, det, t)
    assert abs(np.vdot(a, a).real - 1) < 1e-9
    assert np.allclose(populations(a), populations(b), atol=1e-12)


def test_swap_needs_two_qubits(g):
    with pytest.raises(ValueError):
        swap_evolve(ground_state(3), g, 0.0, 1.0)
    with pytest.raises(ValueError):
        swap_evolve(basis_state("01"), g, 0.0, 1.0, mode="full")


def test_swap_density_matrix(g):
    rho = to_density(basis_state("01"))
    out = swap_evolve(rho, g, 0.0, swap_time(g))
    assert out[2, 2].real > 1 - 1e-6


# -- Landau-Zener ---------------------------------------------------------------

@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_landau_zener_oracle(g, p):
    r = lz_rate_for_probability(g, p)
    assert landau_zener_probability(g, r) == pytest.approx(p, rel=1e-12)
    res = lz_sweep(basis_state("01"), g, r)
    p_diabatic = 1 - res.transfer
    assert abs(p_diabatic - p) / p < 0.01
    assert abs(res.transfer - (1 - p)) / (1 - p) < 0.01


def test_landau_zener_half(g):
    r = lz_rate_for_probability(g, 0.5)
    assert abs(lz_sweep(basis_state("01"), g, r).transfer - 0.5) < 0.005


def test_landau_zener_limits(g):
    fast = lz_sweep(basis_state("01"), g, 1e3 * lz_rate_for_probability(g, 0.5)).transfer
    slow = lz_sweep(basis_state("01"), g, 0.1 * lz_rate_for_probability(g, 0.5)).transfer
    assert fast < 1e-2 and slow > 1 - 2e-3  # 0.5**10 ~ 1e-3


def test_landau_zener_reverse_sweep(g):
    r = lz_rate_for_probability(g, 0.3)
    assert abs(lz_sweep(basis_state("01"), g, -r).transfer - 0.7) < 0.007


def test_landau_zener_rejects_zero_rate(g):
    with pytest.raises(ValueError):
        lz_sweep(basis_state("01"), g, 0.0)


# -- Lindblad -------------------------------------------------------------------

def test_lindblad_decay_oracles():
    T1, T2 = 10.0, 0.015  # us, ms
    plus = np.full((2, 2), 0.5, dtype=complex)
    excited = to_density(np.array([0, 1], dtype=complex))
    H = np.zeros((2, 2))
    for t in np.geomspace(1e3, 1e8, 6):
        r1 = lindblad_evolve(excited, H, T1, T2, t)
        r2 = lindblad_evolve(plus, H, T1, T2, t)
        assert abs(r1[1, 1].real - math.exp(-t / (T1 * 1e6))) < 1e-6
        assert abs(abs(r2[0, 1]) - 0.5 * math.exp(-t / (T2 * 1e9))) < 1e-6
        for r in (r1, r2):
            assert abs(np.trace(r).real - 1) < 1e-9
            assert np.max(np.abs(r - r.conj().T)) < 1e-12
            assert np.min(np.linalg.eigvalsh(r)) > -1e-8


def test_lindblad_zero_time():
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    assert np.allclose(lindblad_evolve(rho, np.zeros((2, 2)), 5.0, 0.01, 0.0), rho, atol=0)


def test_lindblad_with_drive_matches_closed_when_rates_vanish(he3_qubit):
    H = rabi_hamiltonian(rabi_frequency(he3_qubit, 1e-7), 0.0)
    t = pi_duration(he3_qubit, 1e-7) / 2
    rho = lindblad_evolve(to_density(ground_state(1)), H, math.inf, math.inf, t)
    psi = rabi_evolve(ground_state(1), he3_qubit, RabiPulse("q", 1e-7, t))
    assert np.allclose(rho, to_density(psi), atol=1e-9)


def test_lindblad_rejects_unphysical_t2():
    rho = to_density(np.array([0, 1], dtype=complex))
    with pytest.warns(RuntimeWarning):
        with pytest.raises(ConfigurationError):
            lindblad_evolve(rho, np.zeros((2, 2)), 1.0, 0.01, 10.0)


def test_lindblad_rejects_bad_input():
    with pytest.raises(ValueError):
        lindblad_evolve(np.array([[0.5, 0.5], [0.1, 0.5]]), np.zeros((2, 2)), 1.0, 0.001, 1.0)
    with pytest.raises(ValueError):
        lindblad_evolve(np.eye(2) / 2, np.array([[0, 1], [0, 0]]), 1.0, 0.001, 1.0)


def test_liouvillian_stack_matches():
    ops = qubit_collapse_ops(1, 2.0, 0.001)
    Hs = np.stack([rabi_hamiltonian(0.01 * k, 0.002 * k) for k in range(4)])
    stack = liouvillian_stack(Hs, ops)
    for k in range(4):
        assert np.allclose(stack[k], liouvillian(Hs[k], ops), atol=1e-15)


def test_two_qubit_lindblad_independent_decay():
    rho = to_density(basis_state("11"))
    T1 = 3.0
    t = 2e6
    out = lindblad_evolve(rho, np.zeros((4, 4)), T1, 2 * T1 * 1e-3, t)
    p = math.exp(-t / (T1 * 1e6))
    assert out[3, 3].real == pytest.approx(p * p, abs=1e-9)
    assert out[0, 0].real == pytest.approx((1 - p) ** 2, abs=1e-9)


# -- schedules ------------------------------------------------------------------

def _program(he3_qubit, g, body):
    tau = pi_duration(he3_qubit, 1e-7)
    return "material he3\nqubit q0 bias=0\nqubit q1 bias=0\n" + body.format(pi=repr(tau))


def test_run_single_pi_pulse(he3_qubit):
    tau = pi_duration(he3_qubit, 1e-7)
    sched = dsl.parse(f"material he3\ntemperature 0.01\nqubit q0 bias=0\npulse q0 erf=1 duration={tau!r}\nreadout\n")
    traj = run_schedule(sched)
    assert populations(traj.final)[1] == pytest.approx(1.0, abs=1e-9)
    assert traj.total_time == pytest.approx(tau)


def test_run_empty_schedule():
    sched = dsl.parse("material he3\nqubit q0\nqubit q1\n")
    traj = run_schedule(sched)
    assert np.array_equal(traj.final, ground_state(2))
    assert traj.total_time == 0.0 and len(traj.snapshots) == 1


def test_run_pi_then_swap(he3_qubit, g):
    sched = dsl.parse(_program(he3_qubit, g, "pulse q0 erf=1 duration={pi}\nswap q0 q1 duration=auto\n"))
    traj = run_schedule(sched)
    assert populations(traj.final)[1] > 1 - 1e-6  # |01>
    assert traj.total_time == pytest.approx(pi_duration(he3_qubit, 1e-7) + swap_time(g))


def test_run_matches_direct_swap(he3_qubit, g):
    sched = dsl.parse(_program(he3_qubit, g, "pulse q0 erf=1 duration={pi}\nswap q0 q1 duration=1000\n"))
    direct = swap_evolve(rabi_evolve(ground_state(2), {"q0": he3_qubit, "q1": he3_qubit},
                                     RabiPulse("q0", 1e-7, pi_duration(he3_qubit, 1e-7))), g, 0.0, 1000.0)
    assert np.allclose(populations(run_schedule(sched).final), populations(direct), atol=1e-9)


def test_run_sweep_event(he3_qubit, g):
    # sweep through resonance slowly enough to transfer nearly completely
    sched = dsl.parse(_program(he3_qubit, g, "pulse q0 erf=1 duration={pi}\nsweep q0 q1 rate=0.05 span=2\n"))
    traj = run_schedule(sched)
    assert traj.total_time == pytest.approx(pi_duration(he3_qubit, 1e-7) + 2 * 2 / 0.05 * 1e3)
    assert populations(traj.final)[1] > 0.99


def test_stark_event_phase(he3_qubit):
    # a Stark step only adds relative phase: populations stay, the |1> phase rotates
    sched = dsl.parse("material he3\nqubit q0\nstark q0 field=10 duration=5\n")
    psi = np.array([1, 1], dtype=complex) / math.sqrt(2)
    out = run_schedule(sched, initial=psi).final
    from eohsim.qubit import build_qubit
    dw = build_qubit(HE3, 10 * V_PER_CM).omega01 - he3_qubit.omega01
    assert np.allclose(out, psi * np.array([1, np.exp(-1j * dw * 5)]), atol=1e-9)


def test_run_open_system(he3_qubit):
    tau = pi_duration(he3_qubit, 1e-7)
    sched = dsl.parse(f"material he3\nt2 0.001\nqubit q0\nqubit q1\npulse q0 erf=1 duration={tau!r}\nwait 1e6\n")
    traj = run_schedule(sched, open_system=True, t1_us=1.0)
    rho = traj.final
    check_state(rho)
    assert rho[2, 2].real == pytest.approx(math.exp(-1.0), rel=2e-3)  # q0 decayed for ~1 us
    closed = run_schedule(sched).final
    assert populations(closed)[2] == pytest.approx(1.0, abs=1e-9)


def test_run_open_rejects_unphysical():
    sched = dsl.parse("material he3\nt2 100\nqubit q0\nwait 1\n")
    with pytest.raises(ConfigurationError):
        run_schedule(sched, open_system=True, t1_us=1.0)


def test_trajectory_snapshots_and_csv(he3_qubit):
    tau = pi_duration(he3_qubit, 1e-7)
    sched = dsl.parse(f"material he3\nqubit q0\npulse q0 erf=1 duration={tau!r}\n")
    traj = run_schedule(sched, snapshot_dt=tau / 4)
    assert [s.t for s in traj.snapshots] == pytest.approx([0, tau / 4, tau / 2, 3 * tau / 4, tau])
    assert populations(traj.snapshots[2].state)[1] == pytest.approx(0.5, abs=1e-9)
    buf = io.StringIO()
    traj.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t_ps,basis_index,re_amp,im_amp"
    assert len(lines) == 1 + 2 * len(traj.snapshots)
    assert len(traj.to_json()) == len(traj.snapshots)


def test_run_rejects_undefined_qubit():
    from eohsim.qubit import DeviceGeometry

    sched = dsl.parse("material he3\nqubit q0\nqubit q1\nwait 1\nswap q0 q1 duration=1\n")
    with pytest.raises(ValueError, match="undefined qubit"):
        run_schedule(sched, device=DeviceGeometry(biases={"q0": 0.0, "q2": 0.0}))
