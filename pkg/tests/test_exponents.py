import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from eulervac.exponents import (exterior_probes, full_slacks, p_exponent, q_tilde, reduced_slacks, solve_window,
                                theta_threshold, verify_full_system, verify_reduced_system)


def test_thresholds():
    assert theta_threshold(3, 0.8) == pytest.approx(1.5)
    assert theta_threshold(2.5, 1.0) == 0.0
    assert theta_threshold(1.5, 0.75) == pytest.approx(9 / (0.5 * (0.25 * 0.75 + 0.25)) * 0.25)
    assert theta_threshold(1.5, 0.75) == pytest.approx(10.2857, abs=1e-4)


def test_beta_outside_range_rejected():
    with pytest.raises(ValueError):
        theta_threshold(3, 0.4)


def test_window_gamma_three():
    w = solve_window(3, 0.8, 0.8, 2, 3)
    assert w.feasible
    assert w.q_tilde == pytest.approx(0.5) and w.p_exp == pytest.approx(1 / 3)
    assert w.kappa_range == pytest.approx((0.2, 0.3))
    assert w.nu_range[0] == pytest.approx(0.2) and math.isinf(w.nu_range[1])


def test_window_gamma_three_halves():
    w = solve_window(1.5, 0.75, 0.75, 11, 6)
    assert w.feasible
    assert w.kappa_range == pytest.approx((0.75, 1.375))
    assert w.nu_range == pytest.approx((0.25, 0.5))


def test_below_threshold_infeasible():
    w = solve_window(3, 0.8, 0.8, 1.4, 3)
    assert not w.feasible and w.reasons


def test_kappa_zero_fails_first_inequality():
    s = full_slacks(3, 0.8, 0.8, 0.5, 0.0, 0.3)
    assert s[0] == pytest.approx(-0.2)


def test_midpoint_example_slacks():
    w = solve_window(3, 0.8, 0.8, 2, 3)
    rep = verify_full_system(w, 0.25, 0.3)
    assert rep.passed and all(v > 0 for v in rep.slacks.values()) and len(rep.slacks) == 7


def _uniform_range(ok, grid):
    sel = grid[[ok(v) for v in grid]]
    return sel.min(), sel.max()


@pytest.mark.parametrize("args", [(3, 0.8, 0.8, 2, 3), (1.5, 0.75, 0.75, 11, 6), (1.3, 0.8, 0.8, 30, 9)])
def test_window_matches_brute_force(args):
    # independent oracle: the window is the rectangle on which every full inequality holds,
    # so each kappa endpoint is the worst case over the nu window and vice versa
    w = solve_window(*args)
    gamma, alpha, beta, theta, q = args
    qt = q_tilde(gamma, theta)
    (k_lo, k_hi), (n_lo, n_hi) = w.kappa_range, w.nu_range
    n_top = n_hi if math.isfinite(n_hi) else 5.0
    nus = np.linspace(n_lo, n_top, 201)[1:-1]
    k_top = k_hi if math.isfinite(k_hi) else k_lo + 1.0
    kas = np.linspace(k_lo, k_top, 201)[1:-1]

    def k_ok(k):
        return all(np.all(full_slacks(gamma, alpha, beta, qt, k, n) > 0) for n in nus)

    def n_ok(n):
        return all(np.all(full_slacks(gamma, alpha, beta, qt, k, n) > 0) for k in kas)

    lo, hi = _uniform_range(k_ok, np.linspace(0, 2, 2001))
    assert lo == pytest.approx(k_lo, abs=2e-3)
    assert hi == pytest.approx(k_hi, abs=2e-3) if math.isfinite(k_hi) else hi == 2.0
    lo, hi = _uniform_range(n_ok, np.linspace(0, n_top, 1001))
    assert lo == pytest.approx(n_lo, abs=2 * n_top / 1000)
    if math.isfinite(n_hi):
        assert hi == pytest.approx(n_hi, abs=2 * n_top / 1000)


@st.composite
def feasible_inputs(draw):
    gamma = draw(st.sampled_from([1.3, 1.5, 1.8, 2.0, 2.5, 3.0, 5.0]))
    lo = 1 / min(gamma, 2)
    beta = draw(st.floats(lo + 0.05 * (1 - lo), 0.99))
    alpha = draw(st.one_of(st.just(beta), st.floats(beta, 0.999)))
    thr = theta_threshold(gamma, beta)
    theta = thr * draw(st.floats(1.05, 3.0)) + 0.01
    q = 2 * gamma / (gamma - 1) * draw(st.floats(1.0, 2.0))
    return gamma, alpha, beta, theta, q


@given(feasible_inputs())
def test_window_validity(args):
    w = solve_window(*args)
    assume(w.feasible)
    assert all(verify_full_system(w, k, n).passed for k, n in w.interior_samples(5))
    assert all(verify_reduced_system(w, k, n).passed for k, n in w.interior_samples(5))
    for k, n in exterior_probes(w):
        assert not verify_reduced_system(w, k, n).passed
        if w.alpha == w.beta:
            assert not verify_full_system(w, k, n).passed


@given(st.sampled_from([1.3, 1.5, 1.8, 2.0, 3.0]))
def test_threshold_nonincreasing_in_beta(gamma):
    lo = 1 / min(gamma, 2)
    betas = np.linspace(lo + 1e-3, 1, 200)
    th = [theta_threshold(gamma, b) for b in betas]
    assert np.all(np.diff(th) <= 1e-12)


@given(feasible_inputs(), st.floats(0, 1), st.floats(0, 1))
def test_reduced_implies_full(args, a, b):
    w = solve_window(*args)
    k = 2 * a
    n = 2 * b
    if verify_reduced_system(w, k, n).passed:
        assert verify_full_system(w, k, n).passed


def test_full_does_not_imply_reduced():
    # with alpha > beta the full system admits kappa in (1-alpha, 1-beta]
    gamma, alpha, beta, theta, q = 3, 0.95, 0.8, 10, 3
    qt = q_tilde(gamma, theta)
    k, n = 0.1, 0.5
    assert np.all(full_slacks(gamma, alpha, beta, qt, k, n) > 0)
    assert not np.all(reduced_slacks(gamma, beta, qt, k, n) > 0)


def test_q_tilde_and_p():
    assert q_tilde(3, 2) == pytest.approx(0.5)
    assert p_exponent(3, 2) == pytest.approx(1 / 3)
    assert math.isinf(q_tilde(3, 100))


def test_sharp_lower_kappa_when_first_nu_bound_binds():
    w = solve_window(1.3, 0.8, 0.8, 30, 9)
    assert w.nu_range[1] == pytest.approx(0.3 * 0.6 / 0.7)
    assert w.kappa_range[0] == pytest.approx(0.8)
    assert w.kappa_range[0] < 1.3 * 0.2 / 0.3
