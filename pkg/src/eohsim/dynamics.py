"""Time evolution of qubit registers.

States are numpy arrays over the computational basis with qubit 0 as the
most significant bit: a 1-D amplitude vector (pure) or a 2-D density matrix
(mixed).  Each qubit is described in a frame rotating at its own bias
transition frequency.

All propagation uses fixed-step classical Runge-Kutta (RK4).  For a linear
equation x' = A x with constant A one RK4 step is the matrix polynomial
I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24, so N steps are taken as a matrix
power.  Time-dependent generators build the per-step matrices in batches and
multiply them together with a pairwise tree.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import HBAR, V_PER_CM, ConfigurationError, Material, E_FIELD, ghz_to_rad_per_ps, material_params
from .qubit import DeviceGeometry, QubitParams, build_qubit, coupling_strength
from .stark import Grid

logger = logging.getLogger(__name__)

STEP_SAFETY = 0.005  # largest |eigenvalue of A| * h
MIN_STEPS = 1000
CHUNK = 4096
LZ_SPAN = 50.0  # default half-range of a Landau-Zener sweep, in units of g

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
EXCITED = np.array([[0, 0], [0, 1]], dtype=complex)  # |1><1|


# -- states ---------------------------------------------------------------------

def basis_state(bits: str) -> np.ndarray:
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def ground_state(n: int) -> np.ndarray:
    return basis_state("0" * n)


def num_qubits(state: np.ndarray) -> int:
    n = int(round(math.log2(state.shape[0])))
    if 2**n != state.shape[0]:
        raise ValueError(f"state dimension {state.shape[0]} is not a power of two")
    return n


def is_pure(state: np.ndarray) -> bool:
    return state.ndim == 1


def to_density(state: np.ndarray) -> np.ndarray:
    return np.outer(state, state.conj()) if is_pure(state) else state


def populations(state: np.ndarray) -> np.ndarray:
    return np.abs(state) ** 2 if is_pure(state) else np.real(np.diag(state)).copy()


def check_state(state: np.ndarray, tol: float = 1e-9) -> None:
    """Raise ValueError if ``state`` is not a normalized pure state or valid density matrix."""
    num_qubits(state)
    if is_pure(state):
        norm = float(np.sum(np.abs(state) ** 2))
        if abs(norm - 1.0) > tol:
            raise ValueError(f"state norm {norm} differs from 1")
        return
    if state.shape[0] != state.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(state - state.conj().T)) > 1e-12:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(state).real - 1.0) > tol:
        raise ValueError("density matrix trace differs from 1")
    if np.min(np.linalg.eigvalsh(state)) < -tol:
        raise ValueError("density matrix has negative eigenvalues")


# -- embedding local operators --------------------------------------------------

def apply_local(state: np.ndarray, U: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply ``U`` (2^k x 2^k) to ``targets`` of a pure state or as U rho U^dagger."""
    n = num_qubits(state)
    k = len(targets)
    if is_pure(state):
        t = np.moveaxis(state.reshape((2,) * n), targets, range(k))
        t = (U @ t.reshape(2**k, -1)).reshape((2,) * n)
        return np.moveaxis(t, range(k), targets).reshape(-1)
    rows = list(targets)
    cols = [n + q for q in targets]
    t = np.moveaxis(state.reshape((2,) * (2 * n)), rows, range(k))
    t = (U @ t.reshape(2**k, -1)).reshape((2,) * (2 * n))
    t = np.moveaxis(t, range(k), rows)
    t = np.moveaxis(t, cols, range(k))
    t = (U.conj() @ t.reshape(2**k, -1)).reshape((2,) * (2 * n))
    return np.moveaxis(t, range(k), cols).reshape(2**n, 2**n)


def apply_superop(rho: np.ndarray, S: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply a row-major superoperator on ``targets`` of a density matrix."""
    n = num_qubits(rho)
    k = len(targets)
    axes = list(targets) + [n + q for q in targets]
    t = np.moveaxis(rho.reshape((2,) * (2 * n)), axes, range(2 * k))
    t = (S @ t.reshape(4**k, -1)).reshape((2,) * (2 * n))
    return np.moveaxis(t, range(2 * k), axes).reshape(2**n, 2**n)


def embed(op: np.ndarray, target: int, n: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        out = np.kron(out, op if q == target else np.eye(2))
    return out


# -- RK4 --------------------------------------------------------------------------

def rk4_step_matrix(A: np.ndarray, h: float) -> np.ndarray:
    hA = h * A
    eye = np.eye(A.shape[-1], dtype=complex)
    return eye + hA @ (eye + hA @ (eye / 2 + hA @ (eye / 6 + hA / 24)))


def _spectral_radius(A: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(A)))) if A.size else 0.0


def step_count(duration: float, rate: float, n_steps: Optional[int] = None) -> int:
    """Steps with h <= min(duration/1000, STEP_SAFETY/rate)."""
    if n_steps is not None:
        return int(n_steps)
    if duration == 0:
        return 0
    n = max(MIN_STEPS, math.ceil(duration * rate / STEP_SAFETY))
    return n


def rk4_propagator(A: np.ndarray, duration: float, n_steps: Optional[int] = None) -> np.ndarray:
    """RK4 propagator of x' = A x over ``duration`` for constant A."""
    if duration < 0:
        raise ValueError("duration must be non-negative")
    n = step_count(duration, _spectral_radius(A), n_steps)
    if n == 0:
        return np.eye(A.shape[0], dtype=complex)
    return np.linalg.matrix_power(rk4_step_matrix(A, duration / n), n)


def _tree_product(stack: np.ndarray) -> np.ndarray:
    """stack[-1] @ ... @ stack[0]."""
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            last = stack[-1:]
            paired = stack[1:-1:2] @ stack[0:-1:2]
            stack = np.concatenate([paired, last])
        else:
            stack = stack[1::2] @ stack[0::2]
    return stack[0]


def rk4_propagator_td(generator: Callable[[np.ndarray], np.ndarray], t0: float, duration: float,
                      n_steps: Optional[int] = None) -> np.ndarray:
    """RK4 propagator of x' = A(t) x.

    ``generator`` maps an array of times to a stack of generator matrices.
    """
    probe = generator(np.array([t0, t0 + 0.5 * duration, t0 + duration]))
    dim = probe.shape[-1]
    if duration == 0:
        return np.eye(dim, dtype=complex)
    rate = max(_spectral_radius(a) for a in probe)
    n = step_count(duration, rate, n_steps)
    h = duration / n
    eye = np.eye(dim, dtype=complex)
    total = eye
    for start in range(0, n, CHUNK):
        k = np.arange(start, min(n, start + CHUNK))
        t = t0 + k * h
        A1 = generator(t)
        A2 = generator(t + h / 2)
        A3 = generator(t + h)
        P1 = eye + (h / 2) * A1
        K2 = A2 @ P1
        P2 = eye + (h / 2) * K2
        K3 = A2 @ P2
        K4 = A3 @ (eye + h * K3)
        M = eye + (h / 6) * (A1 + 2 * K2 + 2 * K3 + K4)
        total = _tree_product(M) @ total
    return total


# -- Lindblad pieces ----------------------------------------------------------------

def liouvillian(H: np.ndarray, collapse: Sequence[tuple] = ()) -> np.ndarray:
    """Row-major superoperator of -i/hbar [H, .] + sum_k rate_k D[L_k]."""
    d = H.shape[0]
    eye = np.eye(d)
    L = -1j / HBAR * (np.kron(H, eye) - np.kron(eye, H.T))
    for rate, op in collapse:
        if rate == 0:
            continue
        opd = op.conj().T @ op
        L = L + rate * (np.kron(op, op.conj()) - 0.5 * np.kron(opd, eye) - 0.5 * np.kron(eye, opd.T))
    return L


def liouvillian_stack(Hs: np.ndarray, collapse: Sequence[tuple] = ()) -> np.ndarray:
    """:func:`liouvillian` for a stack of Hamiltonians sharing the same collapse operators."""
    n, d, _ = Hs.shape
    eye = np.eye(d)
    comm = np.einsum("nij,kl->nikjl", Hs, eye) - np.einsum("ij,nlk->nikjl", eye, Hs)
    dissipator = liouvillian(np.zeros((d, d)), collapse)
    return -1j / HBAR * comm.reshape(n, d * d, d * d) + dissipator


def decay_rates(T1_us: float, T2_ms: float) -> tuple[float, float]:
    """(relaxation rate, pure dephasing rate) in 1/ps."""
    gamma1 = 0.0 if math.isinf(T1_us) else 1.0 / (T1_us * 1e6)
    gamma2 = 0.0 if math.isinf(T2_ms) else 1.0 / (T2_ms * 1e9)
    gamma_phi = gamma2 - 0.5 * gamma1
    if gamma_phi < -1e-15 * max(gamma2, gamma1, 1e-300):
        raise ConfigurationError(
            f"T2 = {T2_ms} ms exceeds 2*T1 = {2 * T1_us * 1e-3} ms; pure dephasing rate would be negative"
        )
    return gamma1, max(gamma_phi, 0.0)


def qubit_collapse_ops(n: int, T1_us: float, T2_ms: float) -> list:
    gamma1, gamma_phi = decay_rates(T1_us, T2_ms)
    ops = []
    for q in range(n):
        ops.append((gamma1, embed(LOWER, q, n)))
        # D[sigma_z] at rate gamma_phi/2 damps coherences at gamma_phi
        ops.append((0.5 * gamma_phi, embed(SIGMA_Z, q, n)))
    return ops


def lindblad_evolve(rho: np.ndarray, H: np.ndarray, T1: float, T2: float, t: float,
                    n_steps: Optional[int] = None) -> np.ndarray:
    """Evolve a density matrix for ``t`` ps under H (meV) with T1 (us) and T2 (ms) per qubit."""
    if rho.ndim != 2:
        raise ValueError("lindblad_evolve needs a density matrix")
    check_state(rho)
    if np.max(np.abs(H - H.conj().T)) > 1e-12:
        raise ValueError("Hamiltonian is not Hermitian")
    if T2 > 2 * T1 * 1e-3 * (1 + 1e-12):
        warnings.warn("T2 > 2 T1 is unphysical", RuntimeWarning, stacklevel=2)
    n = num_qubits(rho)
    ops = qubit_collapse_ops(n, T1, T2)
    S = rk4_propagator(liouvillian(H, ops), t, n_steps)
    d = rho.shape[0]
    return (S @ rho.reshape(-1)).reshape(d, d)


# -- single-qubit control -------------------------------------------------------------

@dataclass(frozen=True)
class RabiPulse:
    qubit: str
    E_rf: float  # V/nm, sign flips the drive phase
    duration: float  # ps
    detuning: float = 0.0  # rad/ps, omega_rf - omega01

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("pulse duration must be non-negative")


def rabi_frequency(params: QubitParams, E_rf: float) -> float:
    """Omega = e E_rf |<0|z|1>| / hbar in rad/ps."""
    return E_FIELD * E_rf * abs(params.z01) / HBAR


def rabi_hamiltonian(Omega: float, Delta: float) -> np.ndarray:
    """(hbar Delta/2) sigma_z + (hbar Omega/2) sigma_x in meV."""
    return 0.5 * HBAR * (Delta * SIGMA_Z + Omega * SIGMA_X)


def _target_index(qubits, qid) -> tuple[QubitParams, int]:
    if isinstance(qubits, QubitParams):
        qubits = {qubits.id: qubits}
    if qid not in qubits:
        raise KeyError(f"unknown qubit id {qid!r}")
    return qubits[qid], list(qubits).index(qid)


def rabi_evolve(state: np.ndarray, qubits, pulse: RabiPulse, n_steps: Optional[int] = None) -> np.ndarray:
    """Rectangular resonant drive on one qubit, returned in the drive frame.

    ``qubits`` is a QubitParams or an ordered mapping id -> QubitParams whose
    order matches the state's qubit order.
    """
    check_state(state)
    params, index = _target_index(qubits, pulse.qubit)
    H = rabi_hamiltonian(rabi_frequency(params, pulse.E_rf), pulse.detuning)
    U = rk4_propagator(-1j / HBAR * H, pulse.duration, n_steps)
    return apply_local(state, U, [index])


# -- two-qubit gates ------------------------------------------------------------------

def _pair_ops():
    flip = np.zeros((4, 4), dtype=complex)
    flip[1, 2] = flip[2, 1] = 1.0  # |01> <-> |10>
    counter = np.zeros((4, 4), dtype=complex)
    counter[0, 3] = counter[3, 0] = 1.0  # |00> <-> |11>
    n_a = np.diag([0, 0, 1, 1]).astype(complex)
    n_b = np.diag([0, 1, 0, 1]).astype(complex)
    return flip, counter, n_a, n_b


FLIP, COUNTER, N_A, N_B = _pair_ops()


def swap_time(g: float) -> float:
    """pi hbar / (2 g): half a period of the |01> <-> |10> oscillation."""
    return math.pi * HBAR / (2.0 * g)


def _swap_frame_and_hamiltonian(g, detuning, mode, omega01):
    """Frame Hamiltonian H0 and full Hamiltonian H in meV for the pair propagator."""
    if mode == "rwa":
        H0 = HBAR * detuning * N_A
        return H0, H0 + g * FLIP
    if mode == "full":
        if omega01 is None:
            raise ValueError("full mode needs the qubit transition frequency omega01")
        H0 = HBAR * ((omega01 + detuning) * N_A + omega01 * N_B)
        return H0, H0 + g * (FLIP + COUNTER)
    raise ValueError(f"unknown mode {mode!r}")


def _frame_phase(H0: np.ndarray, t: float) -> np.ndarray:
    return np.diag(np.exp(1j * np.real(np.diag(H0)) * t / HBAR))


def swap_propagator(g: float, detuning: float, t: float, mode: str = "rwa",
                    omega01: Optional[float] = None, t0: float = 0.0,
                    n_steps: Optional[int] = None) -> np.ndarray:
    """4x4 propagator in the per-qubit rotating frame from t0 to t0 + t."""
    H0, H = _swap_frame_and_hamiltonian(g, detuning, mode, omega01)
    U = rk4_propagator(-1j / HBAR * H, t, n_steps)
    return _frame_phase(H0, t0 + t) @ U @ _frame_phase(H0, -t0)


def swap_evolve(state: np.ndarray, g: float, detuning: float, t: float, mode: str = "rwa",
                omega01: Optional[float] = None, t0: float = 0.0,
                n_steps: Optional[int] = None) -> np.ndarray:
    """Dipolar exchange between two qubits held for ``t`` ps.

    ``detuning`` (rad/ps) is qubit 0's transition frequency minus qubit 1's.
    In ``full`` mode the |00> <-> |11> term oscillating at the sum
    frequency is kept, which needs the absolute ``omega01`` of qubit 1.
    """
    if state.shape[0] != 4:
        raise ValueError("swap_evolve needs a two-qubit state")
    check_state(state)
    if t < 0:
        raise ValueError("hold time must be non-negative")
    U = swap_propagator(g, detuning, t, mode, omega01, t0, n_steps)
    return U @ state if is_pure(state) else U @ state @ U.conj().T


@dataclass
class SweepResult:
    state: np.ndarray
    transfer: float  # probability of following the adiabatic branch
    propagator: np.ndarray = field(repr=False)


def _lz_generator(g, rate, delta_start, t0=0.0):
    def gen(t):
        t = np.atleast_1d(t)
        delta = delta_start + rate * (t - t0)
        H = g * FLIP + delta[:, None, None] * N_A
        return -1j / HBAR * H
    return gen


def _adiabatic_pair(g, delta):
    """Eigenvectors of [[0, g], [g, delta]] on (|01>, |10>), ascending energy."""
    _, v = np.linalg.eigh(np.array([[0.0, g], [g, delta]]))
    return v


def lz_sweep(state: np.ndarray, g: float, rate: float, span: Optional[float] = None,
             n_steps: Optional[int] = None) -> SweepResult:
    """Sweep qubit 0's detuning linearly through resonance with qubit 1.

    The detuning runs from -span to +span (meV) at ``rate`` meV/ps (reverse
    for negative rates); ``span`` defaults to 50 g.  ``transfer`` is the
    probability of staying on the adiabatic branch that starts as |01>,
    evaluated in the adiabatic basis at the sweep end points, i.e. the
    probability of ending in |10> for an asymptotically long sweep.
    """
    if rate == 0:
        raise ValueError("sweep rate must be non-zero")
    if state.shape[0] != 4:
        raise ValueError("lz_sweep needs a two-qubit state")
    check_state(state)
    span = LZ_SPAN * g if span is None else span
    start = -span if rate > 0 else span
    duration = 2.0 * span / abs(rate)
    U = rk4_propagator_td(_lz_generator(g, rate, start), 0.0, duration, n_steps)

    v_start = _adiabatic_pair(g, start)
    v_end = _adiabatic_pair(g, -start)
    # |01> is the upper branch when its diabatic energy 0 exceeds the start detuning
    branch = 1 if start < 0 else 0
    block = U[1:3, 1:3]
    amp = v_end[:, branch].conj() @ block @ v_start[:, branch]
    transfer = float(abs(amp) ** 2)

    out = U @ state if is_pure(state) else U @ state @ U.conj().T
    return SweepResult(out, transfer, U)


def landau_zener_probability(g: float, rate: float) -> float:
    """Diabatic passage probability exp(-2 pi g^2 / (hbar |r|))."""
    return math.exp(-2.0 * math.pi * g * g / (HBAR * abs(rate)))


def lz_rate_for_probability(g: float, p_diabatic: float) -> float:
    return 2.0 * math.pi * g * g / (HBAR * math.log(1.0 / p_diabatic))


# -- schedules -----------------------------------------------------------------------

@dataclass
class Snapshot:
    t: float  # ps
    state: np.ndarray = field(repr=False)
    label: str = ""


@dataclass
class Trajectory:
    snapshots: list
    final: np.ndarray = field(repr=False)
    qubits: dict
    total_time: float

    def write_csv(self, stream) -> None:
        """Pure-state snapshots as ``t_ps,basis_index,re_amp,im_amp``."""
        import csv

        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["t_ps", "basis_index", "re_amp", "im_amp"])
        for snap in self.snapshots:
            if not is_pure(snap.state):
                raise ValueError("CSV trajectories need pure states; use to_json for density matrices")
            for i, amp in enumerate(snap.state):
                writer.writerow([repr(float(snap.t)), i, repr(float(amp.real)), repr(float(amp.imag))])

    def to_json(self) -> list:
        out = []
        for snap in self.snapshots:
            rho = to_density(snap.state)
            out.append({"t_ps": snap.t, "label": snap.label, "re": rho.real.tolist(), "im": rho.imag.tolist()})
        return out


class _Runner:
    """Executes schedule events against a register state."""

    def __init__(self, schedule, device, material, grid, open_system, t1_us):
        self.schedule = schedule
        self.device = device
        self.material = material
        self.grid = grid
        self.mode = schedule.header.mode
        self.ids = device.qubit_ids
        self.n = len(self.ids)
        self._cache: dict = {}
        self.qubits = {q: self.params_at(q, device.biases[q]) for q in self.ids}
        self.open = open_system
        if open_system:
            from .decoherence import t1_ripplon

            self.T2 = schedule.header.t2
            if t1_us is None:
                nu = max(p.omega01 for p in self.qubits.values()) / (2 * math.pi) * 1e3
                t1_us = t1_ripplon(material, schedule.header.temperature, nu)
            self.T1 = t1_us
            decay_rates(self.T1, self.T2)  # raises if inconsistent
            self.idle = liouvillian(np.zeros((2, 2)), qubit_collapse_ops(1, self.T1, self.T2))

    def params_at(self, qid, field_v_per_nm):
        key = field_v_per_nm
        if key not in self._cache:
            self._cache[key] = build_qubit(self.material, field_v_per_nm, self.grid)
        p = self._cache[key]
        return QubitParams(qid, p.omega01, p.z00, p.z01, p.z11, p.bias, p.z2_diff)

    # each event becomes (targets, unitary-or-generator factory, duration)

    def _local_map(self, targets, H_or_gen, s, frame=None, td=False, t0=0.0):
        """Map on the target qubits for local time s: a unitary (closed) or superoperator (open)."""
        k = len(targets)
        if not self.open:
            if td:
                U = rk4_propagator_td(lambda t: -1j / HBAR * H_or_gen(t), t0, s)
            else:
                U = rk4_propagator(-1j / HBAR * H_or_gen, s)
            if frame is not None:
                U = frame[1] @ U @ frame[0]
            return U
        ops = qubit_collapse_ops(k, self.T1, self.T2)
        if td:
            S = rk4_propagator_td(lambda t: liouvillian_stack(H_or_gen(t), ops), t0, s)
        else:
            S = rk4_propagator(liouvillian(H_or_gen, ops), s)
        if frame is not None:
            after, before = frame[1], frame[0]
            S = np.kron(after, after.conj()) @ S @ np.kron(before, before.conj())
        return S

    def _apply(self, state, targets, m, s):
        if not self.open:
            return apply_local(state, m, targets)
        if m is not None:
            state = apply_superop(state, m, targets)
        if s > 0:
            idle = rk4_propagator(self.idle, s)
            for q in range(self.n):
                if q not in targets:
                    state = apply_superop(state, idle, [q])
        return state

    def evolve(self, state, event, t0, s):
        """State after ``s`` ps of ``event`` started at absolute time t0."""
        from . import dsl

        idx = self.ids.index
        if isinstance(event, dsl.Wait):
            return self._apply(state, [], None, s) if self.open else state
        if isinstance(event, dsl.Pulse):
            q = self.qubits[event.qubit]
            delta = ghz_to_rad_per_ps(event.detuning)
            H = rabi_hamiltonian(rabi_frequency(q, event.erf * V_PER_CM), delta)
            # drive frame -> qubit frame: |1> picks up exp(-i delta s)
            frame = (np.eye(2), np.diag([1.0, np.exp(-1j * delta * s)]))
            return self._apply(state, [idx(event.qubit)], self._local_map([0], H, s, frame), s)
        if isinstance(event, dsl.Stark):
            q = self.qubits[event.qubit]
            shifted = self.params_at(event.qubit, event.field * V_PER_CM)
            H = HBAR * (shifted.omega01 - q.omega01) * EXCITED
            return self._apply(state, [idx(event.qubit)], self._local_map([0], H, s), s)
        if isinstance(event, (dsl.Swap, dsl.Sweep)):
            qa, qb = self.qubits[event.a], self.qubits[event.b]
            g = coupling_strength(qa, qb, self.device.separation(event.a, event.b))
            targets = [idx(event.a), idx(event.b)]
            if isinstance(event, dsl.Swap):
                H0, H = _swap_frame_and_hamiltonian(g, qa.omega01 - qb.omega01, self.mode, qb.omega01)
                frame = (_frame_phase(H0, -t0), _frame_phase(H0, t0 + s))
                return self._apply(state, targets, self._local_map(targets, H, s, frame), s)
            gen = self._sweep_hamiltonian(event, qa, qb, g, t0)
            return self._apply(state, targets, self._local_map(targets, gen, s, td=True, t0=t0), s)
        raise TypeError(f"cannot evolve {event!r}")

    def _sweep_hamiltonian(self, event, qa, qb, g, t0):
        wa, wb = qa.omega01, qb.omega01
        span = HBAR * ghz_to_rad_per_ps(event.span)
        rate = HBAR * ghz_to_rad_per_ps(event.rate) * 1e-3  # meV/ps
        start = -span if rate > 0 else span
        full = self.mode == "full"

        def H(t):
            t = np.atleast_1d(t)
            delta = start + rate * (t - t0)
            out = ((HBAR * (wb - wa) + delta)[:, None, None] * N_A).astype(complex)
            ph = np.exp(1j * (wa - wb) * t)
            out[:, 2, 1] += g * ph
            out[:, 1, 2] += g * ph.conj()
            if full:
                ph2 = np.exp(1j * (wa + wb) * t)
                out[:, 3, 0] += g * ph2
                out[:, 0, 3] += g * ph2.conj()
            return out
        return H

    def duration(self, event) -> float:
        from . import dsl

        if isinstance(event, dsl.Swap):
            if event.duration is not None:
                return event.duration
            qa, qb = self.qubits[event.a], self.qubits[event.b]
            return swap_time(coupling_strength(qa, qb, self.device.separation(event.a, event.b)))
        if isinstance(event, dsl.Sweep):
            return 2.0 * abs(event.span / event.rate) * 1e3
        return event.duration


def device_from_schedule(schedule) -> DeviceGeometry:
    h = schedule.header
    return DeviceGeometry(h.pitch, h.film, {q.id: q.bias * V_PER_CM for q in schedule.qubits})


def run_schedule(schedule, device: Optional[DeviceGeometry] = None, material: Optional[Material] = None, *,
                 grid: Optional[Grid] = None, open_system: bool = False, t1_us: Optional[float] = None,
                 snapshot_dt: Optional[float] = None, initial: Optional[np.ndarray] = None) -> Trajectory:
    """Execute every event before the readout, starting from all qubits in |0>.

    Snapshots are taken at the start, after each event, and every
    ``snapshot_dt`` ps inside events when given.  In ``open_system`` mode
    the register is a density matrix subject to per-qubit T1 (default: the
    ripplon estimate at the schedule temperature) and the header's T2.
    """
    from . import dsl

    device = device or device_from_schedule(schedule)
    material = material or material_params(schedule.header.material)
    declared = set(schedule.qubit_ids) or set(device.qubit_ids)
    runner = _Runner(schedule, device, material, grid, open_system, t1_us)

    state = ground_state(runner.n) if initial is None else np.array(initial, dtype=complex)
    if open_system:
        state = to_density(state)
    t = 0.0
    snapshots = [Snapshot(t, state.copy(), "start")]
    for event in schedule.events:
        if isinstance(event, dsl.Readout):
            break
        for qid in _event_qubits(event):
            if qid not in declared or qid not in device.biases:
                raise ValueError(f"event references undefined qubit {qid!r}")
        tau = runner.duration(event)
        if tau < 0:
            raise ValueError(f"negative event duration {tau}")
        if snapshot_dt:
            for s in np.arange(snapshot_dt, tau, snapshot_dt):
                snapshots.append(Snapshot(t + s, runner.evolve(state, event, t, s), type(event).__name__.lower()))
        state = runner.evolve(state, event, t, tau)
        t += tau
        snapshots.append(Snapshot(t, state.copy(), type(event).__name__.lower()))
        logger.debug("%s done at t=%.1f ps", type(event).__name__, t)
    return Trajectory(snapshots, state, runner.qubits, t)


def _event_qubits(event) -> list:
    for attr in ("qubit",):
        if hasattr(event, attr):
            return [getattr(event, attr)]
    if hasattr(event, "a"):
        return [event.a, event.b]
    return []
