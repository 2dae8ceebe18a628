import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from eulervac.eos import (EosParams, SmoothedEos, build_smoothed, hessian_exponent, potential_derivative,
                          potential_second_derivative, pressure, pressure_derivative,
                          pressure_potential, sample_points, smoothing_errors, sound_speed)
from eulervac.rates import fit_slope


def test_pressure_values():
    assert pressure(EosParams(1, 2), 2.0) == 4.0
    assert pressure(EosParams(1, 2), 0.0) == 0.0
    assert pressure(EosParams(1, 1.4), 1.0) == 1.0
    assert sound_speed(EosParams(1, 2), 2.0) == pytest.approx(2.0)


def test_potential_values():
    assert pressure_potential(EosParams(1, 2), 1.0) == pytest.approx(1.0)
    assert pressure_potential(EosParams(1, 3), 2.0) == pytest.approx(4.0)
    P = EosParams(1, 2)
    for r in (0.5, 1.0, 3.0):
        assert r * potential_derivative(P, r) - pressure_potential(P, r) - pressure(P, r) == pytest.approx(0, abs=1e-13)


def test_negative_density_rejected():
    with pytest.raises(ValueError):
        pressure(EosParams(), -1.0)


@given(st.floats(1.05, 4.0), st.floats(0.1, 5.0), st.floats(0.01, 8.0))
def test_potential_matches_quadrature(gamma, kappa, rho):
    # independent oracle: H(r) = r * int_0^r p(s)/s^2 ds
    P = EosParams(kappa, gamma)
    ref = rho * quad(lambda s: kappa * s ** (gamma - 2), 0, rho)[0]
    assert pressure_potential(P, rho) == pytest.approx(ref, rel=1e-8)


@given(st.floats(1.05, 4.0), st.floats(0.05, 8.0))
def test_hessian_is_dp_over_rho(gamma, rho):
    P = EosParams(1.3, gamma)
    h = 1e-5 * rho
    fd = (potential_derivative(P, rho + h) - potential_derivative(P, rho - h)) / (2 * h)
    assert potential_second_derivative(P, rho) == pytest.approx(fd, rel=1e-6)
    assert potential_second_derivative(P, rho) == pytest.approx(pressure_derivative(P, rho) / rho, rel=1e-12)


@pytest.mark.parametrize("gamma", [2.0, 2.5, 3.0])
def test_exact_branch(gamma):
    s = build_smoothed(EosParams(1, gamma), 0.1)
    assert s.exact and s.a1 == 0 and s.b == 0
    z = sample_points(10.0, 0.0, 2000)
    assert np.array_equal(s.H(z), pressure_potential(s.base, z))
    assert smoothing_errors(s)["H"] == 0.0


def test_crossover_at_gamma_three_halves():
    s = build_smoothed(EosParams(1, 1.5), 1e-2)
    assert s.z0 == pytest.approx(1e-4)
    target = 1.5 * 1e-2 ** ((1.5 - 2) / 0.5)
    assert s.d2H(0.0) == pytest.approx(target) and s.d2H(s.z0) == pytest.approx(target)
    assert s.a2 == pytest.approx(1.5)


@given(st.floats(1.1, 1.95), st.floats(1e-4, 0.5))
def test_smoothed_invariants(gamma, sigma):
    s = build_smoothed(EosParams(1, gamma), sigma)
    z = sample_points(s.base.rho_max, s.z0)
    p = pressure_derivative(s.base, z)
    resid = np.abs(s.dp(z) - z * s.d2H(z))
    assert np.all(resid <= 1e-8 * (1 + np.abs(s.dp(z))))
    err = smoothing_errors(s, z)
    assert err["H"] <= s.a1 * sigma * (1 + 1e-12)
    assert err["p"] <= s.b * sigma * (1 + 1e-12)
    assert np.max(np.abs(s.d2H(z))) <= s.a2 * sigma ** hessian_exponent(gamma) * (1 + 1e-12)
    assert np.all(np.isfinite(p[1:]))


def test_sigma_rate():
    P = EosParams(1, 1.5)
    sig = 2.0 ** -np.arange(2, 9)
    errs = [smoothing_errors(build_smoothed(P, s))["H"] for s in sig]
    assert fit_slope(sig, errs) >= 0.95


def test_json_round_trip():
    s = build_smoothed(EosParams(1, 1.5), 0.03)
    assert SmoothedEos.from_json(s.to_json()) == s
