"""Stroboscopic simulation of a static Hamiltonian via periodic driving.

At stroboscopic instants t0 + nT the driven evolution is generated by a
static one-period Hamiltonian; between them a stroboscopic kick (vanishing
at t0 + nT) dresses the observables into a tau-indexed family. Sampling the
dressed observable under the static generator reproduces the driven
expectation values to the accuracy of the first-order high-frequency
expansion.

Sign conventions here follow from the kick operator M(t) = f sz - h sy by
conjugating the effective Hamiltonian with exp(-i K(t0)); the resulting
derivative-coupling term is (f sz - h sy) Xdot and the squared term carries
-2 h J0. The one-period oracle test (with term ablations) certifies this
assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import specfun
from .model import DriveConfig
from .oracle import BathOperators, _expm_hermitian_generator

__all__ = [
    "ShiftedKickCoefficients",
    "ObservableFamily",
    "shifted_kick",
    "floquet_hamiltonian",
    "strob_kick",
    "observable_family",
    "strob_sample",
    "strob_sample_series",
    "polaron_coherence",
    "polaron_state",
    "kick_zero_times",
]


@dataclass(frozen=True)
class ShiftedKickCoefficients:
    """Kick coefficients re-zeroed at the stroboscopic anchor t0."""

    f_tilde: float
    h_tilde: float
    t0: float
    t: float


@dataclass(frozen=True)
class ObservableFamily:
    """An observable dressed by the stroboscopic kick at parameter tau."""

    base: np.ndarray
    transformed: np.ndarray
    tau: float
    t0: float
    period: float


def shifted_kick(
    t: float, t0: float, drive: DriveConfig, tol: float = specfun.SERIES_TOL
) -> ShiftedKickCoefficients:
    """f(t) - f(t0) and h(t) - h(t0); both vanish at t = t0 + nT."""
    kc_t = specfun.kick_coefficients(t, drive, tol)
    kc_0 = specfun.kick_coefficients(t0, drive, tol)
    return ShiftedKickCoefficients(
        f_tilde=kc_t.f - kc_0.f, h_tilde=kc_t.h - kc_0.h, t0=t0, t=t
    )


def floquet_hamiltonian(
    t0: float, drive: DriveConfig, ops: BathOperators
) -> np.ndarray:
    """Static generator of the one-period evolution anchored at t0.

    J0 sz (w0 + X) + (f_{t0} sz - h_{t0} sy) Xdot
    - 2 h_{t0} J0 sx (w0 + X)^2 + H_B.
    """
    j0 = specfun.bessel_j(0, drive.ratio)
    kc = specfun.kick_coefficients(t0, drive)
    w0x = drive.omega0 * ops.identity + ops.X
    h = (
        j0 * (ops.sz @ w0x)
        + (kc.f * ops.sz - kc.h * ops.sy) @ ops.Xdot
        - 2.0 * kc.h * j0 * (ops.sx @ w0x @ w0x)
        + ops.H_B
    )
    return 0.5 * (h + h.conj().T)


def strob_kick(
    t: float, t0: float, drive: DriveConfig, ops: BathOperators
) -> np.ndarray:
    """Stroboscopic kick (f~ sz - h~ sy)(w0 + X); zero at t = t0 + nT."""
    sk = shifted_kick(t, t0, drive)
    w0x = drive.omega0 * ops.identity + ops.X
    return (sk.f_tilde * ops.sz - sk.h_tilde * ops.sy) @ w0x


def observable_family(
    obs: np.ndarray, tau: float, t0: float, drive: DriveConfig, ops: BathOperators
) -> ObservableFamily:
    """Dressed observable exp(i K(tau)) O exp(-i K(tau)).

    Unitary conjugation, so the spectrum of the base observable is
    preserved; at tau = t0 the kick vanishes and O is returned unchanged.
    """
    obs = np.asarray(obs, dtype=complex)
    if np.max(np.abs(obs - obs.conj().T)) > 1e-10:
        raise ValueError("observable must be Hermitian")
    kick = strob_kick(tau, t0, drive, ops)
    u = _expm_hermitian_generator(kick, -1.0)  # exp(+i K)
    transformed = u @ obs @ u.conj().T
    return ObservableFamily(
        base=obs, transformed=transformed, tau=tau, t0=t0, period=drive.period
    )


def strob_sample(
    family: ObservableFamily, n: int, hf: np.ndarray, state0: np.ndarray
) -> float:
    """Driven expectation at tau + nT, sampled under the static generator.

    The exact stroboscopic relation evolves the dressed observable for the
    full interval (tau - t0) + nT from the anchor, in the state at t0.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    duration = (family.tau - family.t0) + n * family.period
    u = _expm_hermitian_generator(hf, duration)
    evolved = u.conj().T @ family.transformed @ u
    return float(np.real(np.trace(state0 @ evolved)))


def strob_sample_series(
    family: ObservableFamily,
    n_values,
    hf: np.ndarray,
    state0: np.ndarray,
) -> np.ndarray:
    """strob_sample over many n with one diagonalization of the generator."""
    evals, evecs = np.linalg.eigh(hf)
    obs_eig = evecs.conj().T @ family.transformed @ evecs
    state_eig = evecs.conj().T @ state0 @ evecs
    out = np.empty(len(n_values))
    for i, n in enumerate(n_values):
        duration = (family.tau - family.t0) + n * family.period
        phase = np.exp(1j * duration * evals)
        evolved = (phase[:, None] * obs_eig) * np.conj(phase)[None, :]
        out[i] = float(np.real(np.trace(state_eig @ evolved)))
    return out


def polaron_coherence(
    tau: float,
    t0: float,
    drive: DriveConfig,
    ops: BathOperators,
    state: np.ndarray,
) -> float:
    """Expectation of the kick-dressed sigma_z at parameter tau.

    Extremal values +-1 are reached on kick-conjugated sigma_z eigenstates,
    which are spin/bath-entangled polaron states whenever h~(tau) != 0.
    """
    family = observable_family(ops.sz, tau, t0, drive, ops)
    return float(np.real(np.trace(state @ family.transformed)))


def polaron_state(
    sign: int,
    tau: float,
    t0: float,
    drive: DriveConfig,
    ops: BathOperators,
    bath_state: np.ndarray | None = None,
) -> np.ndarray:
    """Exact extremal state of the dressed sigma_z at parameter tau.

    exp(i K(tau)) (|sign>_z <sign|_z x rho_bath) exp(-i K(tau)): the
    coherent displacement of the bath is conditioned on the spin direction,
    the hallmark polaron structure.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +-1")
    fock = ops.fock
    if bath_state is None:
        bath_state = np.zeros((fock.bath_dim, fock.bath_dim), dtype=complex)
        bath_state[0, 0] = 1.0
    spin = np.zeros((2, 2), dtype=complex)
    spin[(0, 0) if sign == 1 else (1, 1)] = 1.0
    state = np.kron(spin, bath_state)
    kick = strob_kick(tau, t0, drive, ops)
    u = _expm_hermitian_generator(kick, -1.0)  # exp(+i K)
    return u @ state @ u.conj().T


def kick_zero_times(
    t0: float, drive: DriveConfig, which: str = "f"
) -> list[float]:
    """Roots of the shifted kick coefficient in (t0, t0 + T).

    These are the tau values where the dressed sigma_z takes its simplest
    form (for which='f') and are parameter dependent, so they are located by
    bracketed root-finding instead of being hard-coded.
    """
    if which not in ("f", "h"):
        raise ValueError("which must be 'f' or 'h'")

    def func(t):
        sk = shifted_kick(t, t0, drive)
        return sk.f_tilde if which == "f" else sk.h_tilde

    period = drive.period
    grid = np.linspace(t0, t0 + period, 257)
    vals = np.array([func(t) for t in grid])
    roots: list[float] = []
    for i in range(1, len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif vals[i] * vals[i + 1] < 0.0:
            roots.append(float(optimize.brentq(func, grid[i], grid[i + 1],
                                               xtol=1e-14)))
    return roots
