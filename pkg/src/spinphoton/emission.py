"""Trion radiative recombination and spin-photon entanglement.

Starting from a trion with no photons, the quasi-steady single-excitation
amplitudes in the frame rotating at omega_0 are

    psi_{+/-1/2, +/-} = g (d + i kappa) psi_{+/-3/2,0} / [(d + i kappa)^2 - delta^2]
    psi_{+/-1/2, -/+} = g delta         psi_{+/-3/2,0} / [(d + i kappa)^2 - delta^2]

with d = omega_0 - omega_c.  The emitted-photon polarization per electron
spin branch is the normalized qubit

    |+/-~> = cos(alpha) |+/-> - i sin(alpha) e^{i beta} |-/+>,
    tan(alpha) = delta / sqrt(d^2 + kappa^2),   tan(beta) = d / kappa,

and the electron-photon state psi_up |up,+~> + psi_dn |dn,-~> has concurrence
2 sqrt(Jx^2 + Jy^2) * Fc with Fc = sqrt(1 - sin^2(2 alpha) sin^2(beta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import DensityOperator
from .errors import InvalidParamsError, SingularParamsError
from .params import SystemParams

__all__ = [
    "PhotonQubit",
    "TrionSpin",
    "EmissionAmplitudes",
    "emission_amplitudes",
    "photon_numbers",
    "decay_rate",
    "photon_state_angles",
    "photon_qubit_states",
    "spin_photon_state",
    "concurrence_analytic",
    "wootters_concurrence",
    "steady_eph_density",
]


@dataclass(frozen=True)
class PhotonQubit:
    """Polarization geometry of the emitted photon."""

    alpha: float
    beta: float
    theta: float
    fc: float

    def __post_init__(self) -> None:
        half_pi = math.pi / 2
        if not (-half_pi < self.alpha < half_pi) or not (-half_pi < self.beta < half_pi):
            raise InvalidParamsError("alpha and beta must lie in (-pi/2, pi/2)")
        expected = math.sqrt(1.0 - math.sin(2 * self.alpha) ** 2 * math.sin(self.beta) ** 2)
        if abs(self.fc - expected) > 1e-12:
            raise InvalidParamsError("Fc inconsistent with alpha, beta")

    @property
    def overlap(self) -> float:
        """<+~|-~> = sin(2 alpha) sin(beta); real in this phase convention."""
        return math.sin(2 * self.alpha) * math.sin(self.beta)


@dataclass(frozen=True)
class TrionSpin:
    """Trion pseudospin components, |J| <= 1/2."""

    jx: float
    jy: float
    jz: float

    def __post_init__(self) -> None:
        if self.jx**2 + self.jy**2 + self.jz**2 > 0.25 + 1e-12:
            raise InvalidParamsError("trion pseudospin exceeds 1/2")

    @classmethod
    def from_amplitudes(cls, psi_up: complex, psi_dn: complex) -> "TrionSpin":
        cross = np.conj(psi_up) * psi_dn
        return cls(
            jx=float(cross.real),
            jy=float(cross.imag),
            jz=0.5 * (abs(psi_up) ** 2 - abs(psi_dn) ** 2),
        )

    @classmethod
    def from_density(cls, rho: np.ndarray) -> "TrionSpin":
        rho = np.asarray(rho, dtype=complex)
        cross = rho[1, 0]  # <dn| rho |up> = conj(psi_up) psi_dn for pure states
        return cls(
            jx=float(cross.real),
            jy=float(cross.imag),
            jz=0.5 * float((rho[0, 0] - rho[1, 1]).real),
        )

    @property
    def in_plane(self) -> float:
        return math.hypot(self.jx, self.jy)


@dataclass(frozen=True)
class EmissionAmplitudes:
    """Single-excitation amplitudes (electron spin, photon polarization)."""

    up_plus: complex
    up_minus: complex
    dn_minus: complex
    dn_plus: complex


def _emission_denominator(params: SystemParams) -> complex:
    d = params.detuning
    return (d + 1j * params.kappa) ** 2 - params.delta**2


def emission_amplitudes(
    params: SystemParams, psi_t_up: complex, psi_t_dn: complex
) -> EmissionAmplitudes:
    """Quasi-steady electron-plus-photon amplitudes fed by the trion."""
    params.require_fast_cavity("emission amplitudes")
    denom = _emission_denominator(params)
    if abs(denom) < 1e-12:
        raise SingularParamsError("emission denominator vanishes (requires kappa = 0)")
    d = params.detuning
    same = params.g * (d + 1j * params.kappa) / denom
    cross = params.g * params.delta / denom
    return EmissionAmplitudes(
        up_plus=same * psi_t_up,
        up_minus=cross * psi_t_up,
        dn_minus=same * psi_t_dn,
        dn_plus=cross * psi_t_dn,
    )


def photon_numbers(amplitudes: EmissionAmplitudes) -> tuple[float, float]:
    """Quasi-steady sigma+ and sigma- cavity photon numbers."""
    n_plus = abs(amplitudes.up_plus) ** 2 + abs(amplitudes.dn_plus) ** 2
    n_minus = abs(amplitudes.up_minus) ** 2 + abs(amplitudes.dn_minus) ** 2
    return n_plus, n_minus


def decay_rate(params: SystemParams) -> float:
    """Trion amplitude decay rate; the population decays at twice this.

    gamma = (1/2) sum_{H,V} g^2 kappa / ((omega_0 - omega_{H,V})^2 + kappa^2),
    independent of the trion spin because both cavity modes decay equally.
    """
    params.require_fast_cavity("adiabatic decay rate")
    gamma = 0.0
    for omega_mode in (params.omega_h, params.omega_v):
        gamma += params.g**2 * params.kappa / (
            (params.omega_0 - omega_mode) ** 2 + params.kappa**2
        )
    return 0.5 * gamma


def photon_state_angles(params: SystemParams) -> PhotonQubit:
    """Geometry (alpha, beta, theta, Fc) of the emitted polarization qubit.

    theta is the rotation of the closest orthogonal basis; the branch follows
    atan2(2 kappa delta, d^2 + kappa^2 - delta^2) because tan(theta) alone is
    ambiguous once delta^2 exceeds d^2 + kappa^2.
    """
    d = params.detuning
    alpha = math.atan2(params.delta, math.hypot(d, params.kappa))
    beta = math.atan2(d, params.kappa)
    theta = math.atan2(2.0 * params.kappa * params.delta, d**2 + params.kappa**2 - params.delta**2)
    fc = math.sqrt(1.0 - math.sin(2 * alpha) ** 2 * math.sin(beta) ** 2)
    return PhotonQubit(alpha=alpha, beta=beta, theta=theta, fc=fc)


def photon_qubit_states(qubit: PhotonQubit) -> tuple[np.ndarray, np.ndarray]:
    """|+~> and |-~> in the circular (+, -) basis."""
    c = math.cos(qubit.alpha)
    s = -1j * math.sin(qubit.alpha) * np.exp(1j * qubit.beta)
    plus = np.array([c, s], dtype=complex)
    minus = np.array([s, c], dtype=complex)
    return plus, minus


def spin_photon_state(
    psi_t_up: complex, psi_t_dn: complex, qubit: PhotonQubit
) -> tuple[np.ndarray, float]:
    """Electron-photon pure state in the |up,+>, |up,->, |dn,+>, |dn,-> basis.

    Returns the normalized 4-vector and the photon-state overlap <+~|-~>.
    """
    norm = abs(psi_t_up) ** 2 + abs(psi_t_dn) ** 2
    if abs(norm - 1.0) > 1e-10:
        raise InvalidParamsError(f"trion amplitudes must be normalized, got norm {norm}")
    plus, minus = photon_qubit_states(qubit)
    state = np.concatenate([psi_t_up * plus, psi_t_dn * minus])
    return state, qubit.overlap


def concurrence_analytic(spin: TrionSpin, qubit: PhotonQubit) -> float:
    """Closed-form spin-photon concurrence 2 sqrt(Jx^2 + Jy^2) Fc."""
    return 2.0 * spin.in_plane * qubit.fc


_SIGMA_Y_PAIR = np.kron(
    np.array([[0.0, -1j], [1j, 0.0]]), np.array([[0.0, -1j], [1j, 0.0]])
).real  # sigma_y (x) sigma_y is real


def wootters_concurrence(rho: np.ndarray | DensityOperator) -> float:
    """Two-qubit concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the square roots of the eigenvalues of rho rho~ with
    rho~ = (sigma_y x sigma_y) rho* (sigma_y x sigma_y), sorted descending;
    they are evaluated through the Hermitian form sqrt(rho) rho~ sqrt(rho),
    which keeps the spectrum accurate to machine precision.  For a pure
    state with amplitudes (a, b, c, d) this equals 2 |ad - bc|.
    """
    mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if mat.shape != (4, 4):
        raise InvalidParamsError("wootters_concurrence expects a 4x4 density matrix")
    defect = float(np.max(np.abs(mat - mat.conj().T)))
    if defect > 1e-8:
        raise InvalidParamsError(f"density matrix not Hermitian: defect {defect:.3g}")
    mat = 0.5 * (mat + mat.conj().T)
    tr = float(np.trace(mat).real)
    if tr <= 0:
        raise InvalidParamsError("density matrix trace must be positive")
    mat = mat / tr
    w, v = np.linalg.eigh(mat)
    if w[0] < -1e-8:
        raise InvalidParamsError(f"density matrix has eigenvalue {w[0]:.3g} < 0")
    # eigenvalues at machine-noise level are rank noise; keeping them would
    # leak sqrt(eps)-sized ghosts into the subtracted spectrum
    w = np.clip(w, 0.0, None)
    w[w < 64 * np.finfo(float).eps * w[-1]] = 0.0
    sqrt_rho = (v * np.sqrt(w)) @ v.conj().T
    # singular values of sqrt(rho) S conj(sqrt(rho)) are the lambda_i: this
    # factorized form avoids taking square roots of noisy product eigenvalues
    lam = np.linalg.svd(sqrt_rho @ _SIGMA_Y_PAIR @ sqrt_rho.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def steady_eph_density(params: SystemParams, rho_trion: np.ndarray) -> DensityOperator:
    """Normalized electron-photon density matrix fed by a trion density matrix.

    Closed form of the recombination steady state in the basis
    |up,+>, |up,->, |dn,+>, |dn,->; for a pure in-plane trion it reproduces
    the projector onto the pure state of :func:`spin_photon_state`.
    """
    params.require_fast_cavity("recombination steady state")
    rho_t = np.asarray(rho_trion, dtype=complex)
    if rho_t.shape != (2, 2):
        raise InvalidParamsError("trion density matrix must be 2x2")
    DensityOperator(rho_t).validate(hermiticity_tol=1e-10, trace_tol=1e-8, positivity_tol=1e-8)

    d = params.detuning
    g_pol = params.delta / (d - 1j * params.kappa)
    prefactor = (d**2 + params.kappa**2) / (d**2 + params.delta**2 + params.kappa**2)
    uu, ud = rho_t[0, 0], rho_t[0, 1]
    du, dd = rho_t[1, 0], rho_t[1, 1]
    gc = np.conj(g_pol)
    g2 = abs(g_pol) ** 2
    mat = prefactor * np.array(
        [
            [uu, g_pol * uu, g_pol * ud, ud],
            [gc * uu, g2 * uu, g2 * ud, gc * ud],
            [gc * du, g2 * du, g2 * dd, gc * dd],
            [du, g_pol * du, g_pol * dd, dd],
        ],
        dtype=complex,
    )
    return DensityOperator(mat).normalized()
