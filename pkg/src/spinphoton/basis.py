"""Composite Hilbert space: four matter levels times two photon registers.

Matter levels, in fixed order:

    0  e_up : electron, S_z = +1/2
    1  e_dn : electron, S_z = -1/2
    2  t_up : trion,    J_z = +1/2  (heavy-hole spin +3/2)
    3  t_dn : trion,    J_z = -1/2  (heavy-hole spin -3/2)

Photon registers count sigma+ and sigma- circular photons, each truncated at
``cutoff``.  The flat index is matter-major, then n_plus, then n_minus:

    index = (matter * (cutoff + 1) + n_plus) * (cutoff + 1) + n_minus
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import InvalidParamsError

MATTER_LEVELS = ("e_up", "e_dn", "t_up", "t_dn")
E_UP, E_DN, T_UP, T_DN = range(4)

#: Above this dimension operators are stored as CSR matrices instead of dense.
SPARSE_THRESHOLD = 4 * 16 * 16


@dataclass(frozen=True)
class CompositeBasis:
    """Indexing of the matter (x) photon-register product space."""

    cutoff: int

    def __post_init__(self) -> None:
        if int(self.cutoff) < 1:
            raise InvalidParamsError(f"photon cutoff must be >= 1, got {self.cutoff}")

    @property
    def n_photon_states(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return 4 * self.n_photon_states**2

    def index(self, matter: int, n_plus: int, n_minus: int) -> int:
        m = self.n_photon_states
        if not (0 <= matter < 4 and 0 <= n_plus < m and 0 <= n_minus < m):
            raise IndexError(f"state ({matter}, {n_plus}, {n_minus}) outside basis")
        return (matter * m + n_plus) * m + n_minus

    def unpack(self, index: int) -> tuple[int, int, int]:
        m = self.n_photon_states
        if not (0 <= index < self.dim):
            raise IndexError(f"index {index} outside basis of dimension {self.dim}")
        index, n_minus = divmod(index, m)
        matter, n_plus = divmod(index, m)
        return matter, n_plus, n_minus

    def labels(self) -> list[str]:
        return [
            f"{MATTER_LEVELS[m]},{np_},{nm}"
            for m in range(4)
            for np_ in range(self.n_photon_states)
            for nm in range(self.n_photon_states)
        ]

    def single_photon_block_indices(self) -> list[int]:
        """Indices of |e_up/e_dn> x {one sigma+ photon, one sigma- photon}.

        Ordered as |up,+>, |up,->, |dn,+>, |dn,->, the basis of the
        electron-photon polarization qubit pair.
        """
        return [
            self.index(E_UP, 1, 0),
            self.index(E_UP, 0, 1),
            self.index(E_DN, 1, 0),
            self.index(E_DN, 0, 1),
        ]


@dataclass(frozen=True)
class Operator:
    """A square complex matrix acting on a :class:`CompositeBasis`."""

    basis: CompositeBasis
    matrix: object  # numpy ndarray or scipy sparse matrix
    hermitian: bool = False

    def dense(self) -> np.ndarray:
        if sparse.issparse(self.matrix):
            return np.asarray(self.matrix.todense())
        return np.asarray(self.matrix)

    def dag(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T, hermitian=self.hermitian)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def hermiticity_defect(self) -> float:
        mat = self.dense()
        return float(np.max(np.abs(mat - mat.conj().T)))


def as_storage(basis: CompositeBasis, mat: np.ndarray):
    """Dense below :data:`SPARSE_THRESHOLD`, CSR above (trajectory speed)."""
    if basis.dim > SPARSE_THRESHOLD:
        return sparse.csr_matrix(mat)
    return np.asarray(mat)


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector on a :class:`CompositeBasis`.

    Immutable after construction (operations return new states), so states
    are safe to share across parallel workers.
    """

    basis: CompositeBasis
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex))
        if self.amplitudes.shape != (self.basis.dim,):
            raise InvalidParamsError(
                f"amplitude vector has shape {self.amplitudes.shape}, "
                f"expected ({self.basis.dim},)"
            )

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        n = self.norm
        if n == 0.0:
            raise InvalidParamsError("cannot normalize the zero vector")
        return PureState(self.basis, self.amplitudes / n)

    def expect(self, op: Operator | np.ndarray) -> complex:
        mat = op.matrix if isinstance(op, Operator) else op
        return complex(np.vdot(self.amplitudes, mat @ self.amplitudes))

    def to_density(self) -> "DensityOperator":
        psi = self.normalized().amplitudes
        return DensityOperator(np.outer(psi, psi.conj()), basis=self.basis)


@dataclass(frozen=True)
class DensityOperator:
    """Trace-one positive-semidefinite matrix, optionally on a sub-basis."""

    matrix: np.ndarray
    basis: CompositeBasis | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise InvalidParamsError("density matrix must be square")
        if self.basis is not None and self.matrix.shape[0] != self.basis.dim:
            raise InvalidParamsError("density matrix does not match basis dimension")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def normalized(self) -> "DensityOperator":
        tr = self.trace.real
        if tr <= 0:
            raise InvalidParamsError(f"density matrix trace {tr} is not positive")
        return DensityOperator(self.matrix / tr, basis=self.basis)

    def validate(
        self,
        hermiticity_tol: float = 1e-12,
        trace_tol: float = 1e-10,
        positivity_tol: float = 1e-10,
    ) -> "DensityOperator":
        defect = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if defect > hermiticity_tol:
            raise InvalidParamsError(f"density matrix not Hermitian: defect {defect:.3g}")
        if abs(self.trace.real - 1.0) > trace_tol or abs(self.trace.imag) > trace_tol:
            raise InvalidParamsError(f"density matrix trace {self.trace} is not 1")
        min_eig = float(np.min(np.linalg.eigvalsh(self.matrix)))
        if min_eig < -positivity_tol:
            raise InvalidParamsError(f"density matrix has eigenvalue {min_eig:.3g} < 0")
        return self

    def expect(self, op: Operator | np.ndarray) -> complex:
        mat = op.matrix if isinstance(op, Operator) else op
        return complex(np.trace(mat @ self.matrix))


def basis_state(basis: CompositeBasis, matter: int, n_plus: int = 0, n_minus: int = 0) -> PureState:
    vec = np.zeros(basis.dim, dtype=complex)
    vec[basis.index(matter, n_plus, n_minus)] = 1.0
    return PureState(basis, vec)


def matter_superposition(
    basis: CompositeBasis, amplitudes: dict[int, complex], n_plus: int = 0, n_minus: int = 0
) -> PureState:
    """Superposition of matter levels with a common photon occupation."""
    vec = np.zeros(basis.dim, dtype=complex)
    for matter, amp in amplitudes.items():
        vec[basis.index(matter, n_plus, n_minus)] = amp
    return PureState(basis, vec).normalized()
