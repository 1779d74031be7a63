"""Brute-force validation on a truncated Fock space.

Everything here is dense and exact on the truncated system (x) modes space:
ladder operators, lab/rotating-frame Hamiltonians, thermal bath states,
midpoint-exponential time-ordered propagation, partial traces, and the
assembled analytic rotating-frame propagator built from projector chains and
displacement operators. The scale is deliberately small (a few modes, modest
cutoffs); this is the independent check, not the production path.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import specfun
from .errors import TruncationError
from .floquet_core import (
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    MultiIndex,
    displacement_data,
    spin_projector,
)
from .model import DiscreteBath, DriveConfig, ThermalParams

__all__ = [
    "FockSpace",
    "BathOperators",
    "build_operators",
    "hamiltonian",
    "thermal_state",
    "product_state",
    "propagate",
    "propagator",
    "propagator_snapshots",
    "snapshot_apply",
    "partial_trace_bath",
    "analytic_propagator",
    "mode_occupation",
    "boundary_weight",
    "displacement_matrix",
    "save_fock_operator",
    "load_fock_operator",
]

THERMAL_TAIL_MAX = 1e-4
MIN_STEPS_PER_PERIOD = 100


@dataclass(frozen=True)
class FockSpace:
    """Truncated system (x) bosonic space with a fixed enumeration order.

    Basis index = s * prod(cutoff_k + 1) + lexicographic mode occupations,
    i.e. the system index varies slowest, then mode 1, ..., mode N. This is
    exactly the ordering produced by chained Kronecker products
    kron(system, mode_1, ..., mode_N), and serialized operators are
    reproducible bit-for-bit because of it.
    """

    cutoffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.cutoffs) < 1 or any(c < 1 for c in self.cutoffs):
            raise ValueError("need at least one mode with cutoff >= 1")

    @property
    def n_modes(self) -> int:
        return len(self.cutoffs)

    @property
    def mode_dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def bath_dim(self) -> int:
        return int(np.prod(self.mode_dims))

    @property
    def dim(self) -> int:
        return 2 * self.bath_dim


def _lower(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a


def _kron_chain(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def _mode_operator(fock: FockSpace, k: int, op: np.ndarray) -> np.ndarray:
    """Embed a single-mode operator into the bath factor (no system factor)."""
    mats = [np.eye(d, dtype=complex) for d in fock.mode_dims]
    mats[k] = op
    return _kron_chain(mats)


@dataclass(frozen=True)
class BathOperators:
    """Dense operator table on the full system (x) modes space."""

    a: tuple[np.ndarray, ...]  # annihilation, one per mode
    adag: tuple[np.ndarray, ...]
    X: np.ndarray
    Xdot: np.ndarray
    H_B: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    identity: np.ndarray
    fock: FockSpace
    bath: DiscreteBath


def build_operators(fock: FockSpace, bath: DiscreteBath) -> BathOperators:
    """Ladder operators, bath coupling X, its time derivative, H_B, Paulis."""
    if bath.n_modes != fock.n_modes:
        raise ValueError("bath and Fock space must have the same mode count")
    eye_b = np.eye(fock.bath_dim, dtype=complex)
    a_ops = []
    for k, d in enumerate(fock.mode_dims):
        a_ops.append(np.kron(IDENTITY_2, _mode_operator(fock, k, _lower(d))))
    a_ops = tuple(a_ops)
    adag_ops = tuple(a.conj().T for a in a_ops)
    X = sum(g * (ad + a) for g, ad, a in zip(bath.g, adag_ops, a_ops))
    Xdot = sum(
        1j * g * w * (ad - a)
        for g, w, ad, a in zip(bath.g, bath.omega, adag_ops, a_ops)
    )
    H_B = sum(w * (ad @ a) for w, ad, a in zip(bath.omega, adag_ops, a_ops))
    return BathOperators(
        a=a_ops,
        adag=adag_ops,
        X=X,
        Xdot=Xdot,
        H_B=H_B,
        sx=np.kron(PAULI_X, eye_b),
        sy=np.kron(PAULI_Y, eye_b),
        sz=np.kron(PAULI_Z, eye_b),
        identity=np.eye(fock.dim, dtype=complex),
        fock=fock,
        bath=bath,
    )


def _hamiltonian_parts(frame: str, drive: DriveConfig, ops: BathOperators):
    """Split H(t) = static + sum_i c_i(t) * part_i for fast stepping."""
    w0x = drive.omega0 * ops.identity + ops.X
    if frame == "lab":
        static = drive.omega0 * ops.sz + ops.H_B + ops.sz @ ops.X

        def coeffs(t: float) -> tuple[float, ...]:
            return (drive.A * math.cos(drive.omegaL * t),)

        return static, (ops.sx,), coeffs
    if frame == "rotating":
        static = ops.H_B
        sz_w0x = ops.sz @ w0x
        sy_w0x = ops.sy @ w0x

        def coeffs(t: float) -> tuple[float, ...]:
            phi = drive.ratio * math.sin(drive.omegaL * t)
            return (math.cos(phi), math.sin(phi))

        return static, (sz_w0x, sy_w0x), coeffs
    raise ValueError(f"frame must be 'lab' or 'rotating', got {frame!r}")


def hamiltonian(
    t: float, frame: str, drive: DriveConfig, ops: BathOperators
) -> np.ndarray:
    """Full Hamiltonian at time t in the 'lab' or 'rotating' frame.

    Lab: w0 sz + A cos(wL t) sx + H_B + sz X. Rotating: the exact conjugation
    of sz by the frame unitary in 2x2 closed form, times (w0 + X), plus H_B.
    """
    static, parts, coeffs = _hamiltonian_parts(frame, drive, ops)
    h = static.copy()
    for c, part in zip(coeffs(t), parts):
        h += c * part
    return h


def thermal_state(
    bath: DiscreteBath, fock: FockSpace, th: ThermalParams
) -> np.ndarray:
    """Thermal bath density matrix on the bath factor (diagonal Boltzmann).

    Renormalized to unit trace on the truncated space. Raises TruncationError
    when the discarded occupation tail exceeds 1e-4.
    """
    if th.zero_temperature:
        rho = np.zeros((fock.bath_dim, fock.bath_dim), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    tail = 1.0 - np.prod(
        [1.0 - math.exp(-th.beta * w * (c + 1)) for w, c in zip(bath.omega, fock.cutoffs)]
    )
    if tail > THERMAL_TAIL_MAX:
        raise TruncationError(
            f"thermal tail weight {tail:.3g} > {THERMAL_TAIL_MAX:g}; raise cutoffs"
        )
    factors = []
    for w, d in zip(bath.omega, fock.mode_dims):
        p = np.exp(-th.beta * w * np.arange(d))
        factors.append(np.diag(p / p.sum()).astype(complex))
    return _kron_chain(factors)


def product_state(rho_sys: np.ndarray, rho_bath: np.ndarray) -> np.ndarray:
    """Composite system (x) bath density matrix."""
    return np.kron(np.asarray(rho_sys, dtype=complex), rho_bath)


def _expm_hermitian_generator(H: np.ndarray, scale: float) -> np.ndarray:
    """exp(-1j * scale * H) for Hermitian H via eigendecomposition."""
    evals, evecs = np.linalg.eigh(H)
    return (evecs * np.exp(-1j * scale * evals)) @ evecs.conj().T


def _validate_steps(t_span: float, steps: int, drive: DriveConfig) -> None:
    periods = abs(t_span) / drive.period
    if periods > 0 and steps / periods < MIN_STEPS_PER_PERIOD:
        raise ValueError(
            f"need at least {MIN_STEPS_PER_PERIOD} steps per drive period; "
            f"got {steps / periods:.1f}"
        )


def propagator(
    t_final: float,
    steps: int,
    frame: str,
    drive: DriveConfig,
    ops: BathOperators,
    t_start: float = 0.0,
) -> np.ndarray:
    """Time-ordered propagator U(t_final, t_start) by midpoint exponentials.

    Each step applies exp(-i H(t_mid) h); the result is unitary to round-off
    by construction and the global error is O(h^2).
    """
    _validate_steps(t_final - t_start, steps, drive)
    h = (t_final - t_start) / steps
    static, parts, coeffs = _hamiltonian_parts(frame, drive, ops)
    u = np.eye(ops.fock.dim, dtype=complex)
    hmid = np.empty_like(static)
    for k in range(steps):
        t_mid = t_start + (k + 0.5) * h
        np.copyto(hmid, static)
        for c, part in zip(coeffs(t_mid), parts):
            hmid += c * part
        u = _expm_hermitian_generator(hmid, h) @ u
    return u


def snapshot_apply(
    times: np.ndarray,
    steps_per_period: int,
    frame: str,
    drive: DriveConfig,
    ops: BathOperators,
    func,
) -> list:
    """Apply func(t, U(t, 0)) at each requested time (streaming).

    Snapshot times must sit on the midpoint step grid, which is commensurate
    with the drive period; the driven Hamiltonian then repeats exactly every
    steps_per_period steps, so the walk diagonalizes one period's steps only
    and reaches later periods by multiplying with the cached one-period map.
    """
    times = np.asarray(times, dtype=float)
    if steps_per_period < MIN_STEPS_PER_PERIOD:
        raise ValueError(f"steps_per_period must be >= {MIN_STEPS_PER_PERIOD}")
    m = steps_per_period
    h = drive.period / m
    ks = times / h
    k_int = np.rint(ks).astype(int)
    if np.max(np.abs(ks - k_int)) > 1e-8 or np.any(k_int < 0):
        raise ValueError("snapshot times must be nonneg multiples of the step size")
    static, parts, coeffs = _hamiltonian_parts(frame, drive, ops)

    def step_unitary(j: int) -> np.ndarray:
        hmid = static.copy()
        for c, part in zip(coeffs((j + 0.5) * h), parts):
            hmid += c * part
        return _expm_hermitian_generator(hmid, h)

    # partial products within one period, only at offsets we will revisit
    needed_offsets = sorted({int(k % m) for k in k_int} | {0})
    partials: dict[int, np.ndarray] = {}
    u = np.eye(ops.fock.dim, dtype=complex)
    partials[0] = u
    for j in range(m):
        if j in needed_offsets and j > 0:
            partials[j] = u
        u = step_unitary(j) @ u
    u_period = u

    order = np.argsort(k_int, kind="stable")
    results: dict[int, object] = {}
    u_power = np.eye(ops.fock.dim, dtype=complex)  # u_period ** n_done
    n_done = 0
    for idx in order:
        k = int(k_int[idx])
        n, j = divmod(k, m)
        while n_done < n:
            u_power = u_period @ u_power
            n_done += 1
        u_k = partials[j] @ u_power if j else u_power
        results[idx] = func(float(times[idx]), u_k)
    return [results[idx] for idx in range(times.size)]


def propagator_snapshots(
    times: np.ndarray,
    steps_per_period: int,
    frame: str,
    drive: DriveConfig,
    ops: BathOperators,
) -> list[np.ndarray]:
    """U(t, 0) at each requested time, all commensurate with the step grid."""
    return snapshot_apply(
        times, steps_per_period, frame, drive, ops, lambda _t, u: u.copy()
    )


def propagate(
    rho0: np.ndarray,
    t_final: float,
    steps: int,
    frame: str,
    drive: DriveConfig,
    ops: BathOperators,
) -> np.ndarray:
    """Evolve a density matrix from t = 0 to t_final."""
    u = propagator(t_final, steps, frame, drive, ops)
    return u @ rho0 @ u.conj().T


def partial_trace_bath(rho: np.ndarray, fock: FockSpace) -> np.ndarray:
    """Reduced 2x2 system state; trace preserved exactly."""
    db = fock.bath_dim
    return np.einsum("ibjb->ij", rho.reshape(2, db, 2, db))


def displacement_matrix(fock: FockSpace, mu: np.ndarray) -> np.ndarray:
    """Bath-factor displacement operator exp(sum mu_k a_k^dag - mu_k^* a_k).

    Built per mode (the generators commute across modes) so each factor is
    exactly unitary on its truncated mode space.
    """
    mats = []
    for d, mu_k in zip(fock.mode_dims, mu):
        a = _lower(d)
        gen = mu_k * a.conj().T - np.conj(mu_k) * a
        # gen is anti-Hermitian: exp(gen) = exp(-i (i gen)) with i*gen Hermitian
        mats.append(_expm_hermitian_generator(1j * gen, 1.0))
    return _kron_chain(mats)


def _bath_phase(fock: FockSpace, bath: DiscreteBath, t: float) -> np.ndarray:
    """Diagonal of exp(-i H_B t) on the bath factor."""
    phases = [np.exp(-1j * w * t * np.arange(d))
              for w, d in zip(bath.omega, fock.mode_dims)]
    return reduce(np.outer, phases).ravel() if len(phases) > 1 else phases[0]


def analytic_propagator(
    t: float, drive: DriveConfig, bath: DiscreteBath, fock: FockSpace
) -> np.ndarray:
    """First-order rotating-frame propagator assembled in closed form.

    Sum over the eight projector chains of phase factors, the free bath
    evolution and one net displacement operator per chain. Unitary up to the
    Fock truncation error; meant for validation at small N and cutoffs.
    """
    kc_t = specfun.kick_coefficients(t, drive)
    kc_0 = specfun.kick_coefficients(0.0, drive)
    j0 = specfun.bessel_j(0, drive.ratio)

    bath_phase = _bath_phase(fock, bath, t)
    dim = fock.dim
    out = np.zeros((dim, dim), dtype=complex)
    for n1 in (1, -1):
        p1 = spin_projector(n1, kc_t.f, kc_t.h)
        for n2 in (1, -1):
            p2 = spin_projector(n2, 1.0, 0.0)  # sigma_z eigenbasis
            for n3 in (1, -1):
                p3 = spin_projector(n3, kc_0.f, kc_0.h)
                chain = p1 @ p2 @ p3
                if np.max(np.abs(chain)) < 1e-300:
                    continue
                data = displacement_data(
                    MultiIndex(n1, n2, n3), t, drive, bath,
                    m_t=kc_t.eta, s0=j0, m_0=kc_0.eta,
                )
                disp = displacement_matrix(fock, data.Lambda)
                bath_op = (bath_phase[:, None] * disp)
                phase = np.exp(-1j * data.Omega + 1j * np.imag(data.chi))
                out += phase * np.kron(chain, bath_op)
    return out


def mode_occupation(rho: np.ndarray, k: int, ops: BathOperators) -> float:
    """Expectation of a_k^dag a_k in the given state."""
    n_op = ops.adag[k] @ ops.a[k]
    return float(np.real(np.trace(rho @ n_op)))


def boundary_weight(rho: np.ndarray, fock: FockSpace) -> float:
    """Summed probability of the top occupation level over all modes.

    The truncation-adequacy monitor: keep this below ~1e-6 during a run or
    treat the cutoffs as suspect.
    """
    probs = np.real(np.diag(rho)).reshape((2,) + fock.mode_dims)
    total = 0.0
    for k in range(fock.n_modes):
        total += float(np.sum(np.take(probs, -1, axis=1 + k)))
    return total


_FSBO_MAGIC = b"FSBO"
_FSBO_VERSION = 1


def save_fock_operator(path, mat: np.ndarray, fock: FockSpace) -> None:
    """Dump an operator: 32-byte header (magic, version, dim, n_modes) then
    row-major little-endian complex128 payload."""
    mat = np.ascontiguousarray(mat, dtype="<c16")
    header = struct.pack(
        "<4sIII16x", _FSBO_MAGIC, _FSBO_VERSION, mat.shape[0], fock.n_modes
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(mat.tobytes(order="C"))


def load_fock_operator(path) -> tuple[np.ndarray, int]:
    """Read an FSBO dump; returns (matrix, n_modes)."""
    with open(path, "rb") as fh:
        header = fh.read(32)
        magic, version, dim, n_modes = struct.unpack("<4sIII16x", header)
        if magic != _FSBO_MAGIC or version != _FSBO_VERSION:
            raise ValueError("not an FSBO v1 dump")
        payload = fh.read(dim * dim * 16)
    mat = np.frombuffer(payload, dtype="<c16").reshape(dim, dim).copy()
    return mat, n_modes
