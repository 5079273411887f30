"""Cluster-like multiphoton states from sequential emission.

Each cycle excites the trion with a pi pulse, lets it recombine (mapping
|up> -> |up>|+~> and |dn> -> |dn>|-~>), and rotates the electron spin by
pi/2 before the next cycle.  State vectors live on
(electron) x (polarization qubit)^n in the circular basis with axis order
(electron, photon_n, ..., photon_1): the most recent photon sits next to the
electron.  The spin rotation is fixed to

    |up> -> (|up> + |dn>)/sqrt(2),   |dn> -> (-|up> + |dn>)/sqrt(2),

the convention that reproduces the sign pattern of the three-qubit state
(|up,+~,+~> + |dn,-~,+~> + |dn,-~,-~> - |up,+~,-~>)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .emission import PhotonQubit, photon_qubit_states
from .errors import InvalidParamsError

__all__ = [
    "MultiphotonState",
    "StokesVector",
    "MAX_EXPLICIT_PHOTONS",
    "SPIN_ROTATION",
    "build_cluster_state",
    "three_tangle",
    "stokes_parameters",
    "poincare_rotation_angle",
    "closest_orthogonal_basis",
    "cluster_fidelity",
    "localizable_entanglement_two_photons",
]

#: Explicit state vectors are built up to this many photons (dimension 2^9).
MAX_EXPLICIT_PHOTONS = 8

#: pi/2 electron spin rotation applied between emission cycles.
SPIN_ROTATION = np.array([[1.0, -1.0], [1.0, 1.0]]) / math.sqrt(2.0)


@dataclass
class MultiphotonState:
    """Electron plus n polarization qubits, stored as a flat amplitude vector."""

    n_photons: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        expected = 2 ** (self.n_photons + 1)
        if self.amplitudes.shape != (expected,):
            raise InvalidParamsError(
                f"state for {self.n_photons} photons needs {expected} amplitudes"
            )
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise InvalidParamsError(f"state not normalized: |psi| = {norm}")

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * (self.n_photons + 1))


def _grow(tensor: np.ndarray, photon_states: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """One emission cycle: insert a photon axis right after the electron."""
    plus, minus = photon_states
    emitted = np.stack([plus, minus], axis=0)  # emitted[e, pol]
    return np.einsum("ep,e...->ep...", emitted, tensor)


def build_cluster_state(
    n: int,
    qubit: PhotonQubit,
    electron0: np.ndarray | None = None,
    photon_states: tuple[np.ndarray, np.ndarray] | None = None,
) -> MultiphotonState:
    """Cluster-like state with ``n`` photons; spin rotations between cycles."""
    if n < 1 or n > MAX_EXPLICIT_PHOTONS:
        raise InvalidParamsError(f"n must be in [1, {MAX_EXPLICIT_PHOTONS}], got {n}")
    if electron0 is None:
        electron0 = np.array([1.0, 1.0]) / math.sqrt(2.0)
    tensor = np.asarray(electron0, dtype=complex)
    if tensor.shape != (2,):
        raise InvalidParamsError("initial electron state must be a 2-vector")
    tensor = tensor / np.linalg.norm(tensor)
    states = photon_states or photon_qubit_states(qubit)

    tensor = _grow(tensor, states)
    for _ in range(n - 1):
        tensor = np.einsum("fe,e...->f...", SPIN_ROTATION, tensor)
        tensor = _grow(tensor, states)
    return MultiphotonState(n, tensor.reshape(-1))


def three_tangle(state: MultiphotonState) -> float:
    """Genuine tripartite entanglement of a pure 3-qubit state.

    Four times the modulus of Cayley's 2x2x2 hyperdeterminant of the
    amplitude tensor; 1 for GHZ, 0 for W.
    """
    if state.n_photons != 2:
        raise InvalidParamsError("three_tangle needs an electron plus two photons")
    p = state.tensor
    d1 = (
        p[0, 0, 0] ** 2 * p[1, 1, 1] ** 2
        + p[0, 0, 1] ** 2 * p[1, 1, 0] ** 2
        + p[0, 1, 0] ** 2 * p[1, 0, 1] ** 2
        + p[1, 0, 0] ** 2 * p[0, 1, 1] ** 2
    )
    d2 = (
        p[0, 0, 0] * p[1, 1, 1] * p[0, 1, 1] * p[1, 0, 0]
        + p[0, 0, 0] * p[1, 1, 1] * p[1, 0, 1] * p[0, 1, 0]
        + p[0, 0, 0] * p[1, 1, 1] * p[1, 1, 0] * p[0, 0, 1]
        + p[0, 1, 1] * p[1, 0, 0] * p[1, 0, 1] * p[0, 1, 0]
        + p[0, 1, 1] * p[1, 0, 0] * p[1, 1, 0] * p[0, 0, 1]
        + p[1, 0, 1] * p[0, 1, 0] * p[1, 1, 0] * p[0, 0, 1]
    )
    d3 = (
        p[0, 0, 0] * p[1, 1, 0] * p[1, 0, 1] * p[0, 1, 1]
        + p[1, 1, 1] * p[0, 0, 1] * p[0, 1, 0] * p[1, 0, 0]
    )
    return float(4.0 * abs(d1 - 2.0 * d2 + 4.0 * d3))


@dataclass(frozen=True)
class StokesVector:
    """Poincare-sphere coordinates of a pure polarization state."""

    xi1: float
    xi2: float
    xi3: float

    def __post_init__(self) -> None:
        norm = self.xi1**2 + self.xi2**2 + self.xi3**2
        if abs(norm - 1.0) > 1e-12:
            raise InvalidParamsError(f"Stokes vector of a pure state must be unit, got {norm}")


def stokes_parameters(qubit: PhotonQubit, sign: int) -> StokesVector:
    """Stokes vector of |+~> (sign=+1) or |-~> (sign=-1).

    xi3 is shared by the two states; their overlap lives entirely in that
    common component.
    """
    if sign not in (+1, -1):
        raise InvalidParamsError("sign must be +1 or -1")
    s2a = math.sin(2.0 * qubit.alpha)
    return StokesVector(
        xi1=-sign * math.cos(qubit.beta) * s2a,
        xi2=sign * math.cos(2.0 * qubit.alpha),
        xi3=math.sin(qubit.beta) * s2a,
    )


def poincare_rotation_angle(qubit: PhotonQubit) -> float:
    """Rotation about axis 3 aligning the in-sphere-plane Stokes components.

    cos(angle) = xi2 / sqrt(xi1^2 + xi2^2); for |2 alpha| < pi/2 this is the
    closed form 1/sqrt(1 + cos^2(beta) tan^2(2 alpha)), and the arccos branch
    extends it continuously through cos(2 alpha) = 0 where tan(2 alpha)
    diverges.  Returns 0 for the degenerate case xi1 = xi2 = 0.
    """
    s = stokes_parameters(qubit, +1)
    plane = math.hypot(s.xi1, s.xi2)
    if plane < 1e-300:
        return 0.0
    return math.acos(max(-1.0, min(1.0, s.xi2 / plane)))


def closest_orthogonal_basis(qubit: PhotonQubit) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair maximizing the joint overlap with |+~>, |-~>.

    |~~+/-> = cos(theta/2) |+/-> - i sin(theta/2) |-/+> with theta from
    :func:`spinphoton.emission.photon_state_angles`; satisfies
    |<~~+/-|+/-~>|^2 = (1 + Fc)/2.
    """
    c = math.cos(qubit.theta / 2.0)
    s = -1j * math.sin(qubit.theta / 2.0)
    return np.array([c, s], dtype=complex), np.array([s, c], dtype=complex)


def cluster_fidelity(n: int, qubit: PhotonQubit) -> float:
    """Overlap squared between the produced and the ideal n-photon cluster.

    Closed form ((1 + Fc)/2)^n; for n within the explicit-vector range the
    inner product against the ideal cluster built in the closest orthogonal
    basis is evaluated as well and must agree to 1e-10.
    """
    if n < 1:
        raise InvalidParamsError(f"n must be >= 1, got {n}")
    closed = float(((1.0 + qubit.fc) / 2.0) ** n)
    if n <= MAX_EXPLICIT_PHOTONS:
        produced = build_cluster_state(n, qubit)
        ideal = build_cluster_state(n, qubit, photon_states=closest_orthogonal_basis(qubit))
        explicit = float(abs(np.vdot(ideal.amplitudes, produced.amplitudes)) ** 2)
        if abs(explicit - closed) > 1e-10:
            raise AssertionError(
                f"fidelity mismatch: explicit {explicit!r} vs closed form {closed!r}"
            )
    return closed


def _measured_pair_concurrence_sum(
    dets: tuple[complex, complex, complex], polar: np.ndarray, azim: np.ndarray
) -> np.ndarray:
    """Average two-photon concurrence after measuring the electron.

    For the orthonormal basis u = (cos a/2, e^{i phi} sin a/2) and its
    partner, probability x concurrence of each outcome equals twice the
    modulus of a quadratic form in the conjugated components, so the average
    is 2 (|det M_u| + |det M_v|).
    """
    det_a, det_b, mixed = dets
    x = np.cos(polar / 2.0)
    y = np.sin(polar / 2.0) * np.exp(-1j * azim)  # conj(u1)
    det_u = x**2 * det_a + x * y * mixed + y**2 * det_b
    xv = -np.sin(polar / 2.0) * np.exp(1j * azim)  # conj(v0)
    yv = np.cos(polar / 2.0)
    det_v = xv**2 * det_a + xv * yv * mixed + yv**2 * det_b
    return 2.0 * (np.abs(det_u) + np.abs(det_v))


def localizable_entanglement_two_photons(
    state: MultiphotonState, grid: int = 180, polish_maxiter: int = 200
) -> float:
    """Largest average photon-photon concurrence over electron measurements.

    Scans projective measurement bases on the electron qubit on a
    ``grid x grid`` angle grid and polishes the best point with Nelder-Mead.
    """
    if state.n_photons != 2:
        raise InvalidParamsError("localizable entanglement implemented for n = 2")
    psi = state.tensor
    mat_a, mat_b = psi[0], psi[1]
    det_a = complex(np.linalg.det(mat_a))
    det_b = complex(np.linalg.det(mat_b))
    mixed = complex(np.linalg.det(mat_a + mat_b)) - det_a - det_b
    dets = (det_a, det_b, mixed)

    polar = np.linspace(0.0, math.pi, grid)
    azim = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    pg, ag = np.meshgrid(polar, azim, indexing="ij")
    values = _measured_pair_concurrence_sum(dets, pg, ag)
    best = int(np.argmax(values))
    x0 = np.array([pg.ravel()[best], ag.ravel()[best]])

    result = minimize(
        lambda x: -float(_measured_pair_concurrence_sum(dets, np.array(x[0]), np.array(x[1]))),
        x0,
        method="Nelder-Mead",
        options={"maxiter": polish_maxiter, "fatol": 1e-10, "xatol": 1e-8},
    )
    return float(max(values.ravel()[best], -result.fun))
