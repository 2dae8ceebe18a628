import numpy as np
import pytest
from hypothesis import given, strategies as st

from eulervac.besov import (cusp, default_shifts, difference_norm, estimate_seminorm, lq_norm, sawtooth,
                            verify_mollification_rates, weierstrass_saw)
from eulervac.mollify import MollifierKernel, gradient_mollified
from eulervac.rates import fit_slope

N = 4096
DX = 1.0 / N
X = (np.arange(N) + 0.5) * DX
X0 = X[N // 2]
K = MollifierKernel()
EPS = 2.0 ** -np.arange(3, 9)


def test_constant_seminorm_zero():
    est = estimate_seminorm(np.full(N, 3.0), 0.5, 4, default_shifts(DX, N), DX)
    assert est.seminorm == 0


def test_lq_norm_oracle():
    v = np.random.default_rng(0).standard_normal(100)
    assert lq_norm(v, 3, 0.1) == pytest.approx((np.sum(np.abs(v) ** 3) * 0.1) ** (1 / 3), rel=1e-13)
    assert lq_norm(v, np.inf, 0.1) == np.abs(v).max()


def test_cusp_sup_difference_closed_form():
    # the vertex sits on a cell centre, so max |u(x+h) - u(x)| = h^0.5 exactly
    u = cusp(X, X0, 0.5)
    for k in (1, 4, 32):
        assert difference_norm(u, k, np.inf, DX) == pytest.approx((k * DX) ** 0.5, rel=1e-12)


def test_cusp_difference_norm_direct_sum():
    u = cusp(X, X0, 0.5)
    k = 8
    ref = (np.sum(np.abs(np.sqrt(np.abs(X[k:] - X0)) - np.sqrt(np.abs(X[:-k] - X0))) ** 4) * DX) ** 0.25
    assert difference_norm(u, k, 4, DX) == pytest.approx(ref, rel=1e-12)


def test_cusp_membership_and_divergence():
    u = cusp(X, X0, 0.5)
    fine, coarse = default_shifts(DX, N, 0), default_shifts(DX, N, 3)
    ok = estimate_seminorm(u, 0.5, 4, fine, DX)
    assert ok.seminorm < 2 * estimate_seminorm(u, 0.5, 4, coarse, DX).seminorm
    bad_f = estimate_seminorm(u, 0.9, 4, fine, DX).seminorm
    bad_c = estimate_seminorm(u, 0.9, 4, coarse, DX).seminorm
    # ||Delta_h u||_4 ~ h^(1/2 + 1/4) on the cusp, so h^-0.9 scaling grows like 8^0.15 or more
    assert bad_f / bad_c > 8 ** 0.1


def test_sawtooth_lipschitz():
    u = sawtooth(4 * X)
    est = estimate_seminorm(u, 0.7, 4, default_shifts(DX, N), DX)
    r = est.ratios()
    h = np.array([s[0] for s in est.samples])
    assert np.isfinite(est.seminorm)
    assert fit_slope(h, r) == pytest.approx(0.3, abs=0.05)


@given(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), st.integers(0, 10**6))
def test_scaling(c, seed):
    u = np.random.default_rng(seed).random(512)
    sh = default_shifts(1 / 512, 512)
    a = estimate_seminorm(c * u, 0.5, 2, sh, 1 / 512).seminorm
    b = estimate_seminorm(u, 0.5, 2, sh, 1 / 512).seminorm
    assert a == pytest.approx(abs(c) * b, rel=1e-12)


@given(st.floats(0.05, 0.5), st.floats(0.5, 0.95), st.integers(0, 10**6))
def test_monotone_in_alpha(a1, a2, seed):
    u = np.random.default_rng(seed).random(512)
    sh = default_shifts(1 / 512, 512)
    assert estimate_seminorm(u, a1, 2, sh, 1 / 512).seminorm <= estimate_seminorm(u, a2, 2, sh, 1 / 512).seminorm


def test_cusp_rate_in_band():
    rep = verify_mollification_rates(cusp(X, X0, 0.5), DX, K, 0.5, np.inf, EPS)
    assert 0.45 <= rep.slope_error <= 0.55 and rep.passed


def test_cusp_rate_lq4():
    rep = verify_mollification_rates(cusp(X, X0, 0.5), DX, K, 0.5, 4, EPS)
    assert rep.slope_error >= 0.45 and rep.passed


def test_smooth_rates():
    u = np.sin(2 * np.pi * X)
    rep = verify_mollification_rates(u, DX, K, 0.5, 2, EPS, far_field="periodic")
    assert rep.slope_error >= 1.9
    assert rep.slope_gradient >= -0.1
    # gradient error against the analytic derivative
    errs = [lq_norm(gradient_mollified(u, K, e, DX, far_field="periodic") - 2 * np.pi * np.cos(2 * np.pi * X), 2, DX)
            for e in EPS]
    assert fit_slope(EPS, errs) >= 0.9


def test_constant_exact():
    rep = verify_mollification_rates(np.full(N, 2.0), DX, K, 0.5, 4, EPS)
    assert all(e == 0 for e in rep.error_norms) and np.isnan(rep.slope_error) and rep.passed


@given(st.floats(-10, 10))
def test_rate_invariant_under_constant(c):
    u = weierstrass_saw(X[::8], 0.6)
    dx = 8 * DX
    eps = EPS[:4]
    a = verify_mollification_rates(u, dx, K, 0.6, 4, eps)
    b = verify_mollification_rates(u + c, dx, K, 0.6, 4, eps)
    np.testing.assert_allclose(a.error_norms, b.error_norms, rtol=1e-8, atol=1e-12)
    assert a.slope_error == pytest.approx(b.slope_error, abs=1e-6)


def test_weierstrass_rate():
    rep = verify_mollification_rates(weierstrass_saw(X, 0.6), DX, K, 0.6, np.inf, EPS)
    assert rep.slope_error == pytest.approx(0.6, abs=0.06)
