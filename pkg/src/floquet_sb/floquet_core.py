"""Rotating-frame Floquet machinery and displacement bookkeeping.

Covers the generic framework for a monochromatically driven system linearly
coupled to bosons: the rotating-frame transform, Fourier harmonics of the
coupling operator, the alternating-parity condition those harmonics must
satisfy, the periodic kick matrix M(t), the zeroth harmonic entering the
effective Hamiltonian, spectral projectors, and the per-multi-index
displacement amplitudes and phases that assemble the rotating-frame
propagator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DiscreteBath, DriveConfig

__all__ = [
    "SystemOperators",
    "FourierComponents",
    "ProjectorSpectrum",
    "MultiIndex",
    "DisplacementData",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "rotating_frame",
    "fourier_components",
    "check_parity_condition",
    "m_operator",
    "effective_hamiltonian_parts",
    "eigen_projectors",
    "spin_projector",
    "displacement_data",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

HERMITICITY_TOL = 1e-12
DEGENERACY_TOL = 1e-9


def _check_hermitian(mat: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if np.max(np.abs(mat - mat.conj().T)) > tol * max(1.0, np.max(np.abs(mat))):
        raise ValueError("matrix must be Hermitian")
    return mat


@dataclass(frozen=True)
class SystemOperators:
    """Static system operators: S couples to the bath, V couples to the drive."""

    S: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "S", _check_hermitian(self.S))
        object.__setattr__(self, "V", _check_hermitian(self.V))
        if self.S.shape != self.V.shape or self.S.shape[0] < 2:
            raise ValueError("S and V must be d x d with d >= 2")

    @property
    def dim(self) -> int:
        return self.S.shape[0]


class FourierComponents:
    """Harmonics S^(l) of the rotating-frame coupling operator, |l| <= l_max."""

    def __init__(self, components: dict[int, np.ndarray], drive: DriveConfig):
        self.components = {l: np.asarray(m, dtype=complex) for l, m in components.items()}
        self.drive = drive
        self.l_max = max(abs(l) for l in components)

    def __getitem__(self, l: int) -> np.ndarray:
        dim = self.components[0].shape[0]
        return self.components.get(l, np.zeros((dim, dim), dtype=complex))


@dataclass(frozen=True)
class ProjectorSpectrum:
    """Eigenvalues (ascending) with orthogonal rank-deficiency-free projectors."""

    eigenvalues: np.ndarray
    projectors: np.ndarray  # shape (d, d, d): projectors[i] belongs to eigenvalues[i]

    def __post_init__(self):
        dim = self.projectors.shape[-1]
        total = self.projectors.sum(axis=0)
        if np.max(np.abs(total - np.eye(dim))) > 1e-10:
            raise ValueError("projectors must resolve the identity")


@dataclass(frozen=True)
class MultiIndex:
    """Labels (n1, n2, n3) of the three projector chains; +-1 for a qubit."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        for n in (self.n1, self.n2, self.n3):
            if n not in (-1, 1):
                raise ValueError("qubit multi-index labels must be +-1")


@dataclass(frozen=True)
class DisplacementData:
    """Per-multi-index displacement amplitudes and phases at time t.

    alpha:    kick displacement at time t, per mode, -i M_{n1}(t) g_k e^{i w_k t}
    vartheta: polaron displacement of the static part, per mode
    Lambda:   net displacement alpha(t) + vartheta(t) - alpha(0)
    chi:      complex pairing phase from merging three displacements
    Omega:    accumulated dynamical phase (includes the lamb-shift-like eta_n2)
    eta_n2:   (S0_{n2})^2 sum_k (g_k/w_k)^2 (w_k t - sin w_k t) >= 0
    """

    alpha: np.ndarray
    vartheta: np.ndarray
    Lambda: np.ndarray
    chi: complex
    Omega: float
    eta_n2: float


def rotating_frame(V: np.ndarray, drive: DriveConfig, t: float) -> np.ndarray:
    """Unitary exp(-i (A/omegaL) sin(omegaL t) V) defining the rotating frame."""
    V = _check_hermitian(V)
    phi = (drive.A / drive.omegaL) * math.sin(drive.omegaL * t)
    evals, evecs = np.linalg.eigh(V)
    return (evecs * np.exp(-1j * phi * evals)) @ evecs.conj().T


def fourier_components(
    sys_ops: SystemOperators,
    drive: DriveConfig,
    l_max: int = 32,
    grid_points: int = 512,
    alias_tol: float = 1e-10,
) -> FourierComponents:
    """Harmonics S^(l) = (1/T) int_0^T U^dag(t) S U(t) e^{-i l omegaL t} dt.

    Trapezoidal rule on a uniform periodic grid is spectrally accurate here.
    Raises if the top harmonic has not decayed below alias_tol (increase
    l_max) or if the grid undersamples the requested harmonics.
    """
    if grid_points < 8 * l_max:
        raise ValueError("grid_points must be at least 8 * l_max")
    ts = np.arange(grid_points) * (drive.period / grid_points)
    stack = np.empty((grid_points, sys_ops.dim, sys_ops.dim), dtype=complex)
    for i, t in enumerate(ts):
        u = rotating_frame(sys_ops.V, drive, t)
        stack[i] = u.conj().T @ sys_ops.S @ u
    # DFT over the time axis: component l lives in bin l (mod grid_points)
    spectrum = np.fft.fft(stack, axis=0) / grid_points
    comps: dict[int, np.ndarray] = {}
    for l in range(-l_max, l_max + 1):
        comps[l] = np.ascontiguousarray(spectrum[l % grid_points])
    top = max(np.max(np.abs(comps[l_max])), np.max(np.abs(comps[-l_max])))
    if top > alias_tol:
        raise ValueError(
            f"harmonics not resolved: |S^({l_max})| = {top:.3g} > {alias_tol:g}; "
            "increase l_max"
        )
    return FourierComponents(comps, drive)


def check_parity_condition(
    fc: FourierComponents, tol: float = 1e-9
) -> tuple[bool, float]:
    """Check S^(-l) = (-1)^l S^(l); returns (ok, max violation norm)."""
    worst = 0.0
    for l in range(0, fc.l_max + 1):
        sign = -1.0 if l % 2 else 1.0
        worst = max(worst, float(np.max(np.abs(fc[-l] - sign * fc[l]))))
    return worst <= tol, worst


def _require_parity(fc: FourierComponents) -> None:
    ok, worst = check_parity_condition(fc)
    if not ok:
        raise ValueError(
            f"alternating-parity condition violated (max |S^(-l) - (-1)^l S^(l)| "
            f"= {worst:.3g}); the first-order construction does not apply"
        )


def m_operator(fc: FourierComponents, drive: DriveConfig, t: float) -> np.ndarray:
    """Periodic kick matrix M(t) = sum_{l != 0} S^(l) e^{i l omegaL t} / (i omegaL l)."""
    _require_parity(fc)
    dim = fc[0].shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    for l in range(1, fc.l_max + 1):
        phase = np.exp(1j * l * drive.omegaL * t)
        out += fc[l] * (phase / (1j * drive.omegaL * l))
        out += fc[-l] * (np.conj(phase) / (-1j * drive.omegaL * l))
    return out


def effective_hamiltonian_parts(
    fc: FourierComponents, drive: DriveConfig
) -> np.ndarray:
    """Zeroth harmonic S^(0): the system factor of the effective Hamiltonian.

    The full effective Hamiltonian is S^(0) (omega0 + X) + H_B; the bath
    operators are assembled downstream on a concrete Fock space.
    """
    _require_parity(fc)
    return fc[0]


def eigen_projectors(
    H: np.ndarray, degeneracy_basis: np.ndarray | None = None
) -> ProjectorSpectrum:
    """Spectral decomposition with a deterministic degenerate-subspace choice.

    Eigenvalues come out ascending. Within any cluster degenerate to 1e-9 the
    projectors are chosen to simultaneously diagonalize degeneracy_basis
    (sigma_z for 2x2 input when not given), which keeps the multi-index sums
    well defined and continuous across degeneracies.
    """
    H = _check_hermitian(H, tol=1e-10)
    dim = H.shape[0]
    if degeneracy_basis is None and dim == 2:
        degeneracy_basis = PAULI_Z
    evals, evecs = np.linalg.eigh(H)
    projectors = np.empty((dim, dim, dim), dtype=complex)
    i = 0
    while i < dim:
        j = i
        while j + 1 < dim and evals[j + 1] - evals[i] <= DEGENERACY_TOL:
            j += 1
        block = evecs[:, i : j + 1]
        if j > i and degeneracy_basis is not None:
            reduced = block.conj().T @ degeneracy_basis @ block
            _, rot = np.linalg.eigh(reduced)
            block = block @ rot
        for k in range(i, j + 1):
            v = block[:, k - i]
            projectors[k] = np.outer(v, v.conj())
        i = j + 1
    return ProjectorSpectrum(eigenvalues=evals, projectors=projectors)


def spin_projector(label: int, f: float, h: float) -> np.ndarray:
    """Qubit projector onto the eigenvalue label*sqrt(f^2+h^2) of f sz - h sy.

    Degenerate case f = h = 0 falls back to the sigma_z eigenbasis, matching
    the generic eigen_projectors convention.
    """
    norm = math.hypot(f, h)
    if norm == 0.0:
        direction = PAULI_Z
    else:
        direction = (f * PAULI_Z - h * PAULI_Y) / norm
    return 0.5 * (IDENTITY_2 + label * direction)


def displacement_data(
    n: MultiIndex,
    t: float,
    drive: DriveConfig,
    bath: DiscreteBath,
    m_t: float,
    s0: float,
    m_0: float,
) -> DisplacementData:
    """Displacement amplitudes and phases for one multi-index at time t.

    Scalar inputs are the label-unit eigenvalues of the three spectra: the
    selected eigenvalue of M(t) is n1 * m_t, of S^(0) is n2 * s0, of M(0) is
    n3 * m_0. For the qubit chain m_t = eta(t) >= 0 and s0 is the (signed)
    zeroth Bessel harmonic.
    """
    w = bath.omega
    g = bath.g
    phase = np.exp(1j * w * t)

    m1 = n.n1 * m_t
    s2 = n.n2 * s0
    m3 = n.n3 * m_0

    alpha_t = -1j * m1 * g * phase
    alpha_0 = -1j * m3 * g
    vartheta = s2 * (g / w) * (1.0 - phase)
    lam = alpha_t + vartheta - alpha_0

    chi = np.sum(alpha_t * np.conj(vartheta)) - np.sum(
        (alpha_t + vartheta) * np.conj(alpha_0)
    )
    eta_n2 = float(s2**2 * np.sum((g / w) ** 2 * (w * t - np.sin(w * t))))
    omega_phase = drive.omega0 * (m1 + s2 * t - m3) - eta_n2
    return DisplacementData(
        alpha=alpha_t,
        vartheta=vartheta,
        Lambda=lam,
        chi=complex(chi),
        Omega=float(omega_phase),
        eta_n2=eta_n2,
    )
