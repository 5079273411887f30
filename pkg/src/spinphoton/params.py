"""System parameters of the charged quantum dot in a birefringent micropillar.

All frequencies and rates are measured in units of the cavity amplitude decay
rate ``kappa`` and all times in ``1/kappa``.  The two linearly polarized
cavity modes sit at ``omega_c +/- delta`` (H above, V below); the trion
resonance is ``omega_0``; ``g`` is the light-matter coupling.  ``eps_plus``
and ``eps_minus`` are the complex amplitudes of the two circular pump
components in the instantaneous-pulse convention: the pulse displaces the
circular modes so that ``<c_+/-> = 1j * eps_+/-`` immediately afterwards,
which reproduces the classical initial conditions

    <c_H(0)> = (i / sqrt(2)) (eps_+ + eps_-),
    <c_V(0)> = (1 / sqrt(2)) (eps_+ - eps_-).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InvalidParamsError, RegimeError

#: g/kappa at or below which the fast-cavity analytic formulas are trusted.
FAST_CAVITY_THRESHOLD = 0.25


@dataclass(frozen=True)
class SystemParams:
    """Model frequencies and amplitudes, all in units of ``kappa``."""

    omega_c: float = 0.0
    delta: float = 1.0
    omega_0: float = 0.0
    g: float = 0.15
    kappa: float = 1.0
    eps_plus: complex = 0j
    eps_minus: complex = 0j
    photon_cutoff: int = 2
    fast_cavity_threshold: float = FAST_CAVITY_THRESHOLD

    def __post_init__(self) -> None:
        if self.kappa <= 0:
            raise InvalidParamsError(f"kappa must be positive, got {self.kappa}")
        # g = 0 is admitted for empty-cavity checks even though the physical
        # device always has g > 0.
        if self.g < 0:
            raise InvalidParamsError(f"g must be non-negative, got {self.g}")
        if int(self.photon_cutoff) < 1:
            raise InvalidParamsError(
                f"photon_cutoff must be >= 1, got {self.photon_cutoff}"
            )
        if self.fast_cavity_threshold <= 0:
            raise InvalidParamsError("fast_cavity_threshold must be positive")

    @property
    def omega_h(self) -> float:
        """Frequency of the H (upper) cavity mode."""
        return self.omega_c + self.delta

    @property
    def omega_v(self) -> float:
        """Frequency of the V (lower) cavity mode."""
        return self.omega_c - self.delta

    @property
    def detuning(self) -> float:
        """Trion detuning from the central cavity frequency."""
        return self.omega_0 - self.omega_c

    @property
    def fast_cavity(self) -> bool:
        """True when the photon escapes much faster than it is reabsorbed."""
        return self.g <= self.fast_cavity_threshold * self.kappa

    def require_fast_cavity(self, what: str) -> None:
        """Refuse analytic shortcuts outside the fast-cavity regime."""
        if not self.fast_cavity:
            raise RegimeError(
                f"{what} requires the fast-cavity regime "
                f"(g/kappa <= {self.fast_cavity_threshold}), "
                f"got g/kappa = {self.g / self.kappa:.3g}"
            )

    def with_pump(self, eps_plus: complex, eps_minus: complex) -> "SystemParams":
        return replace(self, eps_plus=complex(eps_plus), eps_minus=complex(eps_minus))
