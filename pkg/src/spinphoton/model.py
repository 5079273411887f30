"""Operators of the trion-cavity model on the circular-mode Fock basis.

The Hamiltonian (units of kappa, hbar = 1) reads, in circular modes,

    H = omega_c (n_+ + n_-) + delta (c_+^dag c_- + c_-^dag c_+)
        + omega_0 (P_t_up + P_t_dn)
        + g [ t_up><e_up| c_+ + |t_dn><e_dn| c_- + h.c. ],

which is the linear-mode Hamiltonian
``sum_{H,V} omega_{H,V} c_{H,V}^dag c_{H,V} + ...`` rewritten through
``c_+/- = (c_H +/- i c_V)/sqrt(2)``; the mode splitting becomes the
photon-mixing term proportional to ``delta``.  Photon escape at rate
``2 kappa`` per mode enters through the non-Hermitian Hamiltonian
``H_nh = H - i kappa (n_+ + n_-)`` and the jump operators
``C_+/- = sqrt(2 kappa) c_+/-``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

from .basis import (
    E_DN,
    E_UP,
    T_DN,
    T_UP,
    CompositeBasis,
    Operator,
    PureState,
    as_storage,
)
from .errors import TruncationOverflowError
from .params import SystemParams

__all__ = [
    "annihilation_plus",
    "annihilation_minus",
    "photon_number_diagonal",
    "trion_number_diagonal",
    "build_hamiltonian",
    "build_nonhermitian",
    "jump_operators",
    "apply_coherent_kick",
    "apply_square_pulse",
]


def _mode_annihilation(basis: CompositeBasis, mode: int) -> np.ndarray:
    """Matrix of c_+ (mode=0) or c_- (mode=1) on the composite basis."""
    m = basis.n_photon_states
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for matter in range(4):
        for n_plus in range(m):
            for n_minus in range(m):
                occ = n_plus if mode == 0 else n_minus
                if occ == 0:
                    continue
                src = basis.index(matter, n_plus, n_minus)
                if mode == 0:
                    dst = basis.index(matter, n_plus - 1, n_minus)
                else:
                    dst = basis.index(matter, n_plus, n_minus - 1)
                mat[dst, src] = np.sqrt(occ)
    return mat


def annihilation_plus(basis: CompositeBasis) -> Operator:
    return Operator(basis, as_storage(basis, _mode_annihilation(basis, 0)))


def annihilation_minus(basis: CompositeBasis) -> Operator:
    return Operator(basis, as_storage(basis, _mode_annihilation(basis, 1)))


def photon_number_diagonal(basis: CompositeBasis) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals of n_+ and n_- (both operators are diagonal here)."""
    m = basis.n_photon_states
    n_plus = np.zeros(basis.dim)
    n_minus = np.zeros(basis.dim)
    for i in range(basis.dim):
        _, np_, nm = basis.unpack(i)
        n_plus[i] = np_
        n_minus[i] = nm
    return n_plus, n_minus


def trion_number_diagonal(basis: CompositeBasis) -> np.ndarray:
    """Diagonal of the total trion population projector."""
    diag = np.zeros(basis.dim)
    for i in range(basis.dim):
        matter, _, _ = basis.unpack(i)
        if matter in (T_UP, T_DN):
            diag[i] = 1.0
    return diag


def _raising_branch(basis: CompositeBasis, branch: int) -> np.ndarray:
    """a_{+/-3/2}^dag c_{+/-} a_{+/-1/2}: absorb a circular photon, promote
    the matching electron spin to the trion of the same branch."""
    m = basis.n_photon_states
    electron, trion = (E_UP, T_UP) if branch == 0 else (E_DN, T_DN)
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for n_plus in range(m):
        for n_minus in range(m):
            occ = n_plus if branch == 0 else n_minus
            if occ == 0:
                continue
            src = basis.index(electron, n_plus, n_minus)
            if branch == 0:
                dst = basis.index(trion, n_plus - 1, n_minus)
            else:
                dst = basis.index(trion, n_plus, n_minus - 1)
            mat[dst, src] = np.sqrt(occ)
    return mat


def _hamiltonian_dense(params: SystemParams, basis: CompositeBasis) -> np.ndarray:
    n_plus, n_minus = photon_number_diagonal(basis)
    h = np.diag(params.omega_c * (n_plus + n_minus)).astype(complex)
    h += np.diag(params.omega_0 * trion_number_diagonal(basis))

    c_plus = _mode_annihilation(basis, 0)
    c_minus = _mode_annihilation(basis, 1)
    mixing = c_plus.conj().T @ c_minus
    h += params.delta * (mixing + mixing.conj().T)

    for branch in (0, 1):
        raising = _raising_branch(basis, branch)
        h += params.g * (raising + raising.conj().T)
    return h


def build_hamiltonian(params: SystemParams, basis: CompositeBasis | None = None) -> Operator:
    """Full Hamiltonian without the excitation term (pulses are applied
    separately through :func:`apply_coherent_kick` or
    :func:`apply_square_pulse`)."""
    basis = basis or CompositeBasis(params.photon_cutoff)
    return Operator(basis, as_storage(basis, _hamiltonian_dense(params, basis)), hermitian=True)


def build_nonhermitian(params: SystemParams, basis: CompositeBasis | None = None) -> Operator:
    """H_nh = H - i kappa (n_+ + n_-).  Satisfies
    ``i (H_nh - H_nh^dag) = sum C^dag C`` with the jump operators below."""
    basis = basis or CompositeBasis(params.photon_cutoff)
    n_plus, n_minus = photon_number_diagonal(basis)
    mat = _hamiltonian_dense(params, basis) - 1j * params.kappa * np.diag(n_plus + n_minus)
    return Operator(basis, as_storage(basis, mat), hermitian=False)


def jump_operators(params: SystemParams, basis: CompositeBasis | None = None) -> tuple[Operator, Operator]:
    """C_+/- = sqrt(2 kappa) c_+/-, the photon-escape jump operators."""
    basis = basis or CompositeBasis(params.photon_cutoff)
    amp = np.sqrt(2.0 * params.kappa)
    c_p = amp * _mode_annihilation(basis, 0)
    c_m = amp * _mode_annihilation(basis, 1)
    return (
        Operator(basis, as_storage(basis, c_p)),
        Operator(basis, as_storage(basis, c_m)),
    )


def _single_mode_displacement(alpha: complex, dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


def _required_padding(alpha: complex) -> int:
    mean = abs(alpha) ** 2
    return int(np.ceil(mean + 8.0 * np.sqrt(mean + 1.0) + 12.0))


def apply_coherent_kick(
    state: PureState,
    eps_plus: complex,
    eps_minus: complex,
    max_truncation: float = 1e-6,
) -> PureState:
    """Instantaneous pump pulse: displace both circular modes.

    The displacement amplitudes are ``alpha_+/- = 1j * eps_+/-`` so that the
    post-kick field expectations reproduce the classical initial conditions
    documented in :mod:`spinphoton.params`.  The displacement is evaluated on
    an enlarged Fock space and projected back; if the projection loses more
    than ``max_truncation`` of the squared norm, the kick refuses with
    :class:`TruncationOverflowError`.  The projected state is renormalized.
    """
    if eps_plus == 0 and eps_minus == 0:
        return state

    basis = state.basis
    small = basis.n_photon_states
    alpha_p = 1j * complex(eps_plus)
    alpha_m = 1j * complex(eps_minus)
    pad = max(_required_padding(alpha_p), _required_padding(alpha_m))

    for _ in range(6):
        big = small + pad
        psi = np.zeros((4, big, big), dtype=complex)
        psi[:, :small, :small] = state.amplitudes.reshape(4, small, small)
        d_plus = _single_mode_displacement(alpha_p, big)
        d_minus = _single_mode_displacement(alpha_m, big)
        psi = np.einsum("ab,mbc->mac", d_plus, psi)
        psi = np.einsum("cb,mab->mac", d_minus, psi)
        # Population touching the enlarged boundary signals an unconverged
        # displacement; enlarge and retry.
        edge = (
            np.sum(np.abs(psi[:, -1, :]) ** 2)
            + np.sum(np.abs(psi[:, :, -1]) ** 2)
        )
        if edge < 1e-16:
            break
        pad *= 2
    kept = psi[:, :small, :small].reshape(-1)
    deficit = 1.0 - float(np.vdot(kept, kept).real) / state.norm**2
    if deficit > max_truncation:
        raise TruncationOverflowError(
            f"coherent kick loses {deficit:.3e} of the norm at cutoff "
            f"{basis.cutoff}; raise the cutoff or loosen max_truncation"
        )
    return PureState(basis, kept).normalized()


def apply_square_pulse(
    state: PureState,
    params: SystemParams,
    duration: float = 0.003,
) -> PureState:
    """Finite-duration excitation pulse of the given length (units 1/kappa).

    A square envelope carrying the same integrated impulse as the
    instantaneous kick; the full Hamiltonian is constant over the pulse, so
    the evolution is an exact matrix exponential.  The envelope sign is chosen
    so that the short-pulse limit reproduces :func:`apply_coherent_kick`.
    """
    if duration <= 0:
        raise ValueError(f"pulse duration must be positive, got {duration}")
    basis = state.basis
    h = build_hamiltonian(params, basis).dense().astype(complex)
    c_plus = _mode_annihilation(basis, 0)
    c_minus = _mode_annihilation(basis, 1)
    drive = (
        params.eps_plus * c_plus.conj().T
        + np.conj(params.eps_plus) * c_plus
        + params.eps_minus * c_minus.conj().T
        + np.conj(params.eps_minus) * c_minus
    )
    h_pulse = h - drive / duration
    u = expm(-1j * duration * h_pulse)
    return PureState(basis, u @ state.amplitudes)
