"""Continuous-wave transmission through the birefringent cavity.

Input-output treatment to first order in the probe amplitude.  The empty-
and coupled-mode building blocks are

    t0 = i kappa / (omega - omega_c + i kappa)
    t1 = i kappa / (omega - omega_c + i kappa - g^2 / (omega - omega_0))

and the mode splitting mixes the circular channels:

    t_pp = t1 / (1 + delta^2 t1 t0 / kappa^2)
    t_mm = t0 / (1 + delta^2 t1 t0 / kappa^2)
    t_mp = -(i delta / kappa) t_pp t0,   t_pm = -(i delta / kappa) t_mm t1.

These closed forms hold in both weak and strong coupling.  The module also
carries a direct steady-state solve of the linearized input-output equations
(4 variables: both circular fields and both optical-polarization coherences)
used as an independent oracle.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParamsError
from .params import SystemParams

__all__ = [
    "TransmissionMatrix",
    "bare_transmissions",
    "transmission_matrix",
    "transmission_matrix_numeric",
    "unpolarized_transmission",
    "unpolarized_transmission_numeric",
    "default_omega_grid",
]


@dataclass(frozen=True)
class TransmissionMatrix:
    """Amplitude transmission coefficients at one probe frequency.

    ``t_ab`` maps a sigma-a input to a sigma-b output; with degenerate modes
    the off-diagonal (polarization-converting) entries vanish identically.
    """

    omega: float
    t_pp: complex
    t_mm: complex
    t_pm: complex
    t_mp: complex

    def unpolarized(self) -> float:
        return 0.5 * (
            abs(self.t_pp) ** 2
            + abs(self.t_pm) ** 2
            + abs(self.t_mp) ** 2
            + abs(self.t_mm) ** 2
        )


def bare_transmissions(params: SystemParams, omega: float) -> tuple[complex, complex]:
    """(t0, t1): transmission without and with the optical selection rules open.

    At omega = omega_0 exactly, t1 is returned as 0, the limit of the
    diverging self-energy term.
    """
    kappa = params.kappa
    d = omega - params.omega_c
    t0 = 1j * kappa / (d + 1j * kappa)
    if omega == params.omega_0:
        # Pole of the self-energy: the coupled channel closes completely.
        t1 = t0 if params.g == 0 else 0j
    else:
        t1 = 1j * kappa / (d + 1j * kappa - params.g**2 / (omega - params.omega_0))
    return t0, t1


def transmission_matrix(params: SystemParams, omega: float) -> TransmissionMatrix:
    """Closed-form transmission matrix for a spin-up electron."""
    t0, t1 = bare_transmissions(params, omega)
    if params.delta == 0:
        return TransmissionMatrix(omega=omega, t_pp=t1, t_mm=t0, t_pm=0j, t_mp=0j)
    denom = 1.0 + params.delta**2 * t1 * t0 / params.kappa**2
    if abs(denom) < 1e-12:
        warnings.warn(
            f"transmission denominator {abs(denom):.3g} at omega={omega}; "
            "coefficients are dominated by cancellation",
            RuntimeWarning,
            stacklevel=2,
        )
    t_pp = t1 / denom
    t_mm = t0 / denom
    factor = -1j * params.delta / params.kappa
    return TransmissionMatrix(
        omega=omega,
        t_pp=t_pp,
        t_mm=t_mm,
        t_mp=factor * t_pp * t0,
        t_pm=factor * t_mm * t1,
    )


def transmission_matrix_numeric(
    params: SystemParams, omega: float, spin: str = "up"
) -> TransmissionMatrix:
    """Steady-state solve of the linearized input-output equations.

    Variables (c_+, c_-, p_+, p_-) where p_+/- are the electron-trion
    coherences of the two branches; the electron spin decides which branch
    the probe can open.  Independent of the closed forms above.
    """
    if spin not in ("up", "dn"):
        raise InvalidParamsError("spin must be 'up' or 'dn'")
    kappa, delta, g = params.kappa, params.delta, params.g
    d_cav = kappa - 1j * (omega - params.omega_c)
    d_pol = 1j * (params.omega_0 - omega)
    occ_up = 1.0 if spin == "up" else 0.0
    occ_dn = 1.0 - occ_up

    a = np.array(
        [
            [d_cav, 1j * delta, 1j * g, 0.0],
            [1j * delta, d_cav, 0.0, 1j * g],
            [1j * g * occ_up, 0.0, d_pol, 0.0],
            [0.0, 1j * g * occ_dn, 0.0, d_pol],
        ],
        dtype=complex,
    )
    sqrt_k = np.sqrt(kappa)
    if omega == params.omega_0 and g > 0:
        # On the trion resonance the open branch's coherence equation forces
        # that circular field to zero; the blocked branch sees the empty
        # cavity.  (The sourceless coherence of the blocked branch is zero.)
        t_bare = kappa / d_cav
        if spin == "up":
            return TransmissionMatrix(omega=omega, t_pp=0j, t_pm=0j, t_mp=0j, t_mm=t_bare)
        return TransmissionMatrix(omega=omega, t_pp=t_bare, t_pm=0j, t_mp=0j, t_mm=0j)

    coeffs = {}
    for label, rhs_index in (("plus", 0), ("minus", 1)):
        rhs = np.zeros(4, dtype=complex)
        rhs[rhs_index] = sqrt_k
        sol = np.linalg.solve(a, rhs)
        coeffs[label] = (sqrt_k * sol[0], sqrt_k * sol[1])
    return TransmissionMatrix(
        omega=omega,
        t_pp=coeffs["plus"][0],
        t_pm=coeffs["plus"][1],
        t_mp=coeffs["minus"][0],
        t_mm=coeffs["minus"][1],
    )


def default_omega_grid(params: SystemParams, n_points: int = 2001) -> np.ndarray:
    """Probe grid resolving both cavity peaks and the trion feature."""
    span = max(5.0 * params.kappa, abs(params.delta) + 5.0 * params.kappa)
    return np.linspace(params.omega_c - span, params.omega_c + span, n_points)


def unpolarized_transmission(params: SystemParams, omega_grid) -> np.ndarray:
    """Intensity transmission of unpolarized light on a frequency grid."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.size == 0:
        raise InvalidParamsError("frequency grid must be non-empty")
    return np.array(
        [transmission_matrix(params, float(w)).unpolarized() for w in omega_grid]
    )


def unpolarized_transmission_numeric(
    params: SystemParams, omega_grid, spin: str = "up"
) -> np.ndarray:
    omega_grid = np.asarray(omega_grid, dtype=float)
    return np.array(
        [transmission_matrix_numeric(params, float(w), spin=spin).unpolarized() for w in omega_grid]
    )
