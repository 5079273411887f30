"""Semiclassical excitation: classical field, two-level branches, pi pulses."""

import math

import numpy as np
import pytest

from spinphoton import RegimeError, SystemParams
from spinphoton.excitation import (
    ExcitationOptimum,
    OptimizerConfig,
    PumpSolutionCoefficients,
    QDAmplitudes,
    analytic_sweet_spot_amplitude,
    cavity_field,
    cavity_field_circular,
    excitation_trace,
    integrate_excitation,
    max_population_zero_delta,
    max_trion_population,
    pi_pulse_amplitudes,
    rabi_population,
)

PI_OVER_G = math.pi / 0.15  # pi * kappa / g at the figure coupling


def test_cavity_field_zero_pump():
    params = SystemParams(eps_plus=0.0, eps_minus=0.0)
    t = np.linspace(0, 5, 11)
    ch, cv = cavity_field(params, t)
    assert np.max(np.abs(ch)) == 0.0
    assert np.max(np.abs(cv)) == 0.0


def test_cavity_field_total_and_beating():
    # circular-component algebra: n_+ + n_- = |eps|^2 e^{-2 kappa t} and, for
    # a pure sigma+ pump at delta = kappa, n_+ = |eps|^2 cos^2(t) e^{-2t}
    params = SystemParams(g=0.15, delta=1.0, eps_plus=PI_OVER_G, eps_minus=0.0)
    t = np.linspace(0, 6, 61)
    cp, cm = cavity_field_circular(params, t)
    total = np.abs(cp) ** 2 + np.abs(cm) ** 2
    assert np.allclose(total, PI_OVER_G**2 * np.exp(-2 * t), rtol=1e-12)
    assert np.allclose(
        np.abs(cp) ** 2, PI_OVER_G**2 * np.cos(t) ** 2 * np.exp(-2 * t), atol=1e-10
    )


def test_integrate_excitation_weak_coupling_limit():
    params = SystemParams(g=1e-8, delta=1.0, eps_plus=1.0, eps_minus=0.5)
    final = integrate_excitation(params, QDAmplitudes.in_plane_electron())
    assert final.trion_population < 1e-14


def test_linear_polarization_pi_pulse_degenerate_modes():
    amp = math.pi / (2 * 0.15)
    params = SystemParams(g=0.15, delta=0.0, eps_plus=amp, eps_minus=-1j * amp)
    final = integrate_excitation(params, QDAmplitudes.in_plane_electron())
    assert final.trion_population == pytest.approx(1.0, abs=1e-4)


def test_circular_pi_pulse_at_unit_splitting():
    params = SystemParams(g=0.15, delta=1.0, eps_plus=PI_OVER_G, eps_minus=0.0)
    final = integrate_excitation(params, QDAmplitudes.in_plane_electron())
    assert final.trion_population == pytest.approx(1.0, abs=1e-3)


def test_integrate_refuses_outside_fast_cavity():
    params = SystemParams(g=0.5, eps_plus=1.0)
    with pytest.raises(RegimeError):
        integrate_excitation(params, QDAmplitudes.in_plane_electron())


def test_rabi_population_values():
    params = SystemParams(g=0.15, delta=0.0, omega_0=0.0)
    assert rabi_population(params, 0.0) == 0.0
    assert rabi_population(params, math.pi / (2 * 0.15)) == pytest.approx(1.0, abs=1e-12)
    assert rabi_population(params, math.pi / (4 * 0.15)) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(RegimeError):
        rabi_population(SystemParams(delta=1.0), 1.0)
    with pytest.raises(RegimeError):
        rabi_population(SystemParams(delta=0.0, omega_0=1.0), 1.0)


def test_max_population_zero_delta_values():
    assert max_population_zero_delta(SystemParams(delta=0.0, omega_0=0.0)) == 1.0
    # sech(pi) evaluated independently
    sech_pi = 1.0 / math.cosh(math.pi)
    assert sech_pi == pytest.approx(0.08626673833405443, abs=1e-15)
    value = max_population_zero_delta(SystemParams(delta=0.0, omega_0=2.0))
    assert value == pytest.approx(0.5 * (1 + sech_pi), abs=1e-15)
    far = max_population_zero_delta(SystemParams(delta=0.0, omega_0=80.0))
    assert far == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(RegimeError):
        max_population_zero_delta(SystemParams(delta=1.0))


def test_pump_functional_boundary_values():
    pump = PumpSolutionCoefficients.from_params(
        SystemParams(delta=1.3, eps_plus=2.0, eps_minus=-0.7j)
    )
    for branch in (+1, -1):
        assert pump.value(branch, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert pump.value(branch, 60.0) == pytest.approx(pump.asymptote(branch), abs=1e-12)
    assert pump.asymptote(+1) == pytest.approx(2.0 * 1.0 - 0.7 * 1.3)
    assert pump.asymptote(-1) == pytest.approx(0.7 * 1.0 + 2.0 * 1.3)


def test_sweet_spot_amplitude_boundary_and_pi_pulse():
    params = SystemParams(g=0.15, delta=1.0, eps_plus=PI_OVER_G, eps_minus=0.0)
    up0, dn0 = analytic_sweet_spot_amplitude(params, 0.0)
    assert abs(up0) < 1e-12 and abs(dn0) < 1e-12
    # at delta = kappa the circular pump pi-pulses BOTH branches: the mode
    # splitting converts sigma+ light into sigma- drive for the other branch
    up_inf, dn_inf = analytic_sweet_spot_amplitude(params, 40.0)
    assert abs(up_inf) ** 2 == pytest.approx(0.5, abs=1e-12)
    assert abs(dn_inf) ** 2 == pytest.approx(0.5, abs=1e-12)


def test_sweet_spot_amplitude_refusals():
    with pytest.raises(RegimeError):
        analytic_sweet_spot_amplitude(SystemParams(omega_0=0.5, eps_plus=1.0), 1.0)
    with pytest.raises(RegimeError):
        analytic_sweet_spot_amplitude(SystemParams(eps_plus=1.0j), 1.0)
    with pytest.raises(RegimeError):
        analytic_sweet_spot_amplitude(SystemParams(eps_minus=1.0), 1.0)


def test_sweet_spot_closed_form_matches_integration():
    # acceptance-grade oracle: pointwise match of Eq.-(10)-type closed form
    # against the integrated dynamics on t in [0, 10] for random draws
    rng = np.random.default_rng(42)
    grid = np.linspace(0.0, 10.0, 101)
    initial = QDAmplitudes.in_plane_electron()
    for _ in range(50):
        params = SystemParams(
            g=0.15,
            delta=rng.uniform(-3, 3),
            eps_plus=rng.uniform(0, 2.5) * PI_OVER_G,
            eps_minus=-1j * rng.uniform(0, 2.5) * PI_OVER_G,
        )
        trace = excitation_trace(params, initial, grid)
        t_up, t_dn = analytic_sweet_spot_amplitude(params, grid, initial)
        assert np.max(np.abs(trace[:, 2] - t_up)) < 1e-6
        assert np.max(np.abs(trace[:, 3] - t_dn)) < 1e-6


def test_pi_pulse_amplitudes_closed_cases():
    amp = pi_pulse_amplitudes(SystemParams(g=0.15, delta=0.0))
    assert amp[0] == pytest.approx(math.pi / (2 * 0.15), abs=1e-12)
    assert amp[1] == pytest.approx(math.pi / (2 * 0.15), abs=1e-12)
    amp = pi_pulse_amplitudes(SystemParams(g=0.15, delta=1.0))
    assert amp[0] == pytest.approx(PI_OVER_G, abs=1e-12)
    assert amp[1] == 0.0


def test_pi_pulse_amplitudes_complete_inversion():
    rng = np.random.default_rng(5)
    for _ in range(20):
        delta = rng.uniform(0.0, 3.0)
        params = SystemParams(g=0.15, delta=delta)
        e_plus, e_minus = pi_pulse_amplitudes(params)
        assert e_plus >= 0 and e_minus >= 0
        driven = params.with_pump(e_plus, -1j * e_minus)
        final = integrate_excitation(driven, QDAmplitudes.in_plane_electron())
        assert final.trion_population == pytest.approx(1.0, abs=1e-3)


def test_branch_independence_and_norm_conservation():
    params = SystemParams(g=0.15, delta=0.8, omega_0=0.4, eps_plus=4.0, eps_minus=2.0j)
    initial = QDAmplitudes(psi_e_up=1.0, psi_e_dn=0.0)
    grid = np.linspace(0.0, 15.0, 61)
    trace = excitation_trace(params, initial, grid)
    assert np.max(np.abs(trace[:, 1])) == 0.0  # dn branch never populated
    assert np.max(np.abs(trace[:, 3])) == 0.0
    up_norm = np.abs(trace[:, 0]) ** 2 + np.abs(trace[:, 2]) ** 2
    assert np.max(np.abs(up_norm - 1.0)) < 1e-8


def test_pi_pulse_transfers_spin_orientation():
    # |psi_t(inf)| = |psi_e(0)| per branch after a pi pulse, so an in-plane
    # electron orientation maps onto an in-plane trion orientation
    params = SystemParams(g=0.15, delta=1.0, eps_plus=PI_OVER_G, eps_minus=0.0)
    initial = QDAmplitudes(psi_e_up=0.3, psi_e_dn=math.sqrt(1 - 0.09))
    final = integrate_excitation(params, initial)
    assert abs(final.psi_t_up) == pytest.approx(abs(initial.psi_e_up), abs=1e-4)
    assert abs(final.psi_t_dn) == pytest.approx(abs(initial.psi_e_dn), abs=1e-4)
    assert final.trion_population == pytest.approx(1.0, abs=1e-3)


def test_max_trion_population_global_phase_invariance():
    config = OptimizerConfig(amp_points=9, phase_points=6, polish_maxiter=60)
    base = SystemParams(g=0.15, delta=0.7, omega_0=0.6)
    result = max_trion_population(base, config)
    assert isinstance(result, ExcitationOptimum)
    # rotating both pump components by a global phase leaves the optimum value
    # unchanged: verify by driving the integrator at the found optimum
    driven = base.with_pump(result.eps_plus, result.eps_minus)
    rotated = base.with_pump(
        result.eps_plus * np.exp(0.9j), result.eps_minus * np.exp(0.9j)
    )
    n_a = integrate_excitation(driven, QDAmplitudes.in_plane_electron()).trion_population
    n_b = integrate_excitation(rotated, QDAmplitudes.in_plane_electron()).trion_population
    assert n_a == pytest.approx(n_b, abs=1e-9)


def test_max_trion_population_sweet_column_and_diagonals():
    for delta in (0.5, 1.0, 2.0):
        result = max_trion_population(SystemParams(g=0.15, delta=delta, omega_0=0.0))
        assert result.n_tr_max == pytest.approx(1.0, abs=5e-3)
    for sign in (+1, -1):
        result = max_trion_population(SystemParams(g=0.15, delta=1.5, omega_0=sign * 1.5))
        assert result.n_tr_max == pytest.approx(1.0, abs=5e-3)


def test_max_trion_population_detuned_degenerate_modes():
    # The supremum at delta = 0 is approached only asymptotically in the pump
    # amplitude, so this check widens the search range well beyond the
    # default map budget (see the decisions ledger).
    config = OptimizerConfig(amp_points=33, phase_points=4, amp_max_factor=24.0)
    result = max_trion_population(SystemParams(g=0.15, delta=0.0, omega_0=2.0), config)
    oracle = max_population_zero_delta(SystemParams(delta=0.0, omega_0=2.0))
    assert result.n_tr_max == pytest.approx(oracle, abs=0.01)


def test_max_trion_population_regime_refusal_and_zero_coupling():
    with pytest.raises(RegimeError):
        max_trion_population(SystemParams(g=0.4))
    assert max_trion_population(SystemParams(g=0.0)).n_tr_max == 0.0


def test_fast_propagator_matches_reference_integrator():
    from spinphoton.excitation import _branch_population_single, _step_schedule

    rng = np.random.default_rng(7)
    amp_max = 3 * math.pi / 0.15
    mids, steps = _step_schedule(1.0, 0.15 * amp_max * math.sqrt(2.0))
    for _ in range(20):
        params = SystemParams(
            g=0.15,
            delta=rng.uniform(-4, 4),
            omega_0=rng.uniform(-4, 4),
            eps_plus=rng.uniform(0, amp_max),
            eps_minus=rng.uniform(0, amp_max) * np.exp(1j * rng.uniform(0, 2 * math.pi)),
        )
        fast = _branch_population_single(params, params.eps_plus, params.eps_minus, mids, steps)
        ref = integrate_excitation(params, QDAmplitudes(psi_e_up=1.0, psi_e_dn=0.0))
        assert fast == pytest.approx(abs(ref.psi_t_up) ** 2, abs=5e-4)
