"""Spin-photon interface of a charged quantum dot in a birefringent cavity.

Numerical (master equation, quantum trajectories) and analytical
(closed-form) treatment of trion excitation, photon emission, polarization
entanglement, cluster-state generation, and cavity transmission.
"""

__version__ = "0.1.0"

from .params import SystemParams  # noqa: E402
from .basis import (  # noqa: E402
    CompositeBasis,
    DensityOperator,
    Operator,
    PureState,
    basis_state,
    matter_superposition,
)
from .errors import (  # noqa: E402
    InvalidParamsError,
    RegimeError,
    SingularParamsError,
    SpinPhotonError,
    StiffnessError,
    TruncationOverflowError,
    UndefinedConcurrenceError,
)

__all__ = [
    "__version__",
    "SystemParams",
    "CompositeBasis",
    "DensityOperator",
    "Operator",
    "PureState",
    "basis_state",
    "matter_superposition",
    "SpinPhotonError",
    "InvalidParamsError",
    "RegimeError",
    "SingularParamsError",
    "StiffnessError",
    "TruncationOverflowError",
    "UndefinedConcurrenceError",
]
