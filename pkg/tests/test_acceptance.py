"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from eulervac.admissibility import check_energy_admissibility, lambda_series
from eulervac.besov import cusp, verify_mollification_rates
from eulervac.commutator import (affine, commutator_field, commutator_parts, kinetic, measure_rate, pressure_law,
                                 product, weierstrass_field)
from eulervac.core import Grid, build_field
from eulervac.eos import EosParams, build_smoothed, sample_points, smoothing_errors
from eulervac.exponents import exterior_probes, solve_window, verify_full_system
from eulervac.mollify import MollifierKernel
from eulervac.rates import fit_slope
from eulervac.relative_energy import energy_density, gronwall_envelope, relative_energy, relative_energy_series
from eulervac.solver import RarefactionSolution, RiemannSetup, SchemeConfig, solve
from eulervac.vacuum_example import (Example4Config, check_uniform_integrability, gronwall_monitor, run_example,
                                     track_boundary)

K = MollifierKernel()


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE.append(line)
    assert ok, line


def test_criterion_1_commutator_rate():
    t0 = time.perf_counter()
    n = 2**12
    dx = 1.0 / n
    x = (np.arange(n) + 0.5) * dx
    f = weierstrass_field(x, 0.8, dx=dx)
    g = weierstrass_field(x, 0.8, 0.25, dx=dx)
    rep = measure_rate(f, g, product(), K, 0.8, 0.8, 4, 2.0 ** -np.arange(4, 9), dx, far_field="periodic")
    dt = time.perf_counter() - t0
    ok = rep.fitted_slope >= 0.6 - 0.1 and dt < 60
    report(1, ok, f"slope {rep.fitted_slope:.4f} (predicted 0.6), {dt:.1f}s")


def test_criterion_2_affine_and_identity():
    rng = np.random.default_rng(2)
    n = 512
    worst_aff = worst_id = 0.0
    for _ in range(20):
        f, g = rng.random(n) + 0.1, rng.standard_normal(n)
        a, b, c = rng.uniform(-3, 3, 3)
        for eps in 2.0 ** -np.arange(3, 9):
            worst_aff = max(worst_aff, np.max(np.abs(commutator_field(f, g, affine(a, b, c), K, eps, 1 / n))))
            for G in (product(), kinetic(), pressure_law(EosParams(1, 1.5))):
                worst_id = max(worst_id, commutator_parts(f, g, G, K, eps, 1 / n).identity_defect())
    report(2, worst_aff <= 1e-12 and worst_id <= 1e-10, f"affine {worst_aff:.2e}, identity {worst_id:.2e}")


def test_criterion_3_eos_smoothing():
    P = EosParams(1, 1.5)
    sig = 2.0 ** -np.arange(2, 9)
    smooth = [build_smoothed(P, s) for s in sig]
    slope = fit_slope(sig, [smoothing_errors(s)["H"] for s in smooth])
    resid = 0.0
    for s in smooth:
        z = sample_points(P.rho_max, s.z0)
        dp = s.dp(z)
        resid = max(resid, float(np.max(np.abs(dp - z * s.d2H(z)) / (1 + np.abs(dp)))))
    errs = [smoothing_errors(build_smoothed(EosParams(1, g), 0.1)) for g in (2.0, 2.5, 3.0)]
    exact = all(e["H"] == 0 and e["p"] == 0 for e in errs)
    ok = slope >= 0.95 and resid <= 1e-8 and exact
    report(3, ok, f"sigma slope {slope:.4f}, residual {resid:.1e}, gamma>=2 exact {exact}")


def test_criterion_4_exponent_windows():
    w3 = solve_window(3, 0.8, 0.8, 2, 3)
    w15 = solve_window(1.5, 0.75, 0.75, 11, 6)
    ok = (w3.feasible and np.allclose(w3.kappa_range, (0.2, 0.3)) and math.isclose(w3.nu_range[0], 0.2)
          and math.isinf(w3.nu_range[1]) and math.isclose(w3.q_tilde, 0.5) and math.isclose(w3.p_exp, 1 / 3))
    ok &= w15.feasible and np.allclose(w15.kappa_range, (0.75, 1.375)) and np.allclose(w15.nu_range, (0.25, 0.5))
    inside = outside = 0
    for w in (w3, w15):
        samples = w.interior_samples(5)
        inside += sum(verify_full_system(w, k, v).passed for k, v in samples)
        probes = exterior_probes(w)
        outside += sum(not verify_full_system(w, k, v).passed for k, v in probes)
        ok &= len(samples) == 25
    n_probes = len(exterior_probes(w3)) + len(exterior_probes(w15))
    ok &= inside == 50 and outside == n_probes
    fmt = lambda r: "(" + ", ".join(f"{v:.4g}" for v in r) + ")"
    report(4, ok, f"windows {fmt(w3.kappa_range)} {fmt(w3.nu_range)} / {fmt(w15.kappa_range)} {fmt(w15.nu_range)}, "
                  f"interior {inside}/50, exterior rejected {outside}/{n_probes}")


def test_criterion_5_relative_energy():
    grid = Grid(0, 1, 64, 0, 1, 2)
    rng = np.random.default_rng(5)
    r, v = rng.random(64) + 0.1, rng.standard_normal(64)
    f = build_field(grid, lambda x: r, lambda x: v)
    zero = relative_energy(f, f.with_role("strong"), EosParams(1, 1.7), 1.0) == 0.0
    nonneg = True
    for gamma in (1.2, 1.5, 2.0, 3.0):
        P = EosParams(1, gamma)
        for _ in range(250):
            rho, rr = rng.random(64) * 3, rng.random(64) * 3
            rho[rng.random(64) < 0.1] = 0.0
            e = energy_density(rho, rng.standard_normal(64), rr, rng.standard_normal(64), P)
            nonneg &= bool(np.all(e >= 0))
    h = np.linspace(-0.9, 3.0, 64)
    quad = np.max(np.abs(energy_density(1 + h, v, np.ones(64), v, EosParams(1, 2)) - h * h))
    report(5, zero and nonneg and quad <= 1e-12, f"self {zero}, 1000 pairs nonnegative {nonneg}, quadratic {quad:.1e}")


def _bump(x):
    s = (x - 0.1) / 0.25
    return np.where(np.abs(s) < 1, np.exp(-1 / np.maximum(1 - s * s, 1e-300)), 0.0)


def test_criterion_6_weak_strong_envelope():
    t0 = time.perf_counter()
    P = EosParams(1, 2)
    sol = RarefactionSolution(RiemannSetup(1, -2, 1, 2, P))
    u0 = lambda x: np.where(x < 0, -2.0, 2.0)
    allow, ok, margins = [], True, []
    for n in (2**9, 2**10):
        g = Grid(-1, 1, n, 0, 0.2, 41)
        strong = sol.sample(g)
        weak = solve(g, lambda x: 1 + 0.05 * _bump(x), u0, SchemeConfig(), P, far_field="constant")
        ref = solve(g, lambda x: 1 + 0 * x, u0, SchemeConfig(), P, far_field="constant")
        a = float(relative_energy_series(ref, strong, P).max())
        env = gronwall_envelope(g.t, relative_energy_series(weak, strong, P), lambda_series(strong), a)
        allow.append(a)
        margins.append(env["min_margin"])
        ok &= env["passed"]
    dt = time.perf_counter() - t0
    ok &= allow[1] < allow[0] and dt < 120
    report(6, ok, f"allowance {allow[0]:.2e} -> {allow[1]:.2e}, min margin {min(margins):.2e}, {dt:.1f}s")


def test_criterion_7_energy_admissibility():
    P = EosParams(1, 2)
    runs = []
    for ul, ur, rl, rr in [(-1, 1, 1, 1), (0, 0, 1, 0.125), (-2, 2, 1, 1), (-3.5, 3.5, 1, 1)]:
        g = Grid(-1, 1, 256, 0, 0.2, 11)
        runs.append((solve(g, lambda x: np.where(x < 0, rl, rr), lambda x: np.where(x < 0, ul, ur),
                           SchemeConfig(), P), P))
    cfg = Example4Config()
    runs.append((run_example(cfg, 256), cfg.params))
    fv_ok = all(check_energy_admissibility(f, p).passed for f, p in runs)
    g = Grid(-1, 1, 128, 0, 0.5, 11)
    bad = build_field(g, lambda t, x: (1 + t) * (1.0 + 0 * x), lambda t, x: 0.5 + 0 * x, time_dependent=True)
    ec = check_energy_admissibility(bad, P)
    ok = fv_ok and not ec.passed and ec.margin < 0
    report(7, ok, f"{len(runs)} FV runs admissible {fv_ok}, fabricated margin {ec.margin:.3e}")


def test_criterion_8_vacuum_example():
    t0 = time.perf_counter()
    cfg = Example4Config()
    runs = {n: run_example(cfg, n) for n in (2**10, 2**11)}
    tr = {n: track_boundary(r, cfg.R, cfg.N_profile) for n, r in runs.items()}
    e1, e2 = max(tr[2**10].error), max(tr[2**11].error)
    track_ok = tr[2**10].passed(2.0) and tr[2**11].passed(2.0) and e2 <= 0.5 * e1 * (1 + 1e-9)
    run = runs[2**10]
    gm = gronwall_monitor(run, cfg.theta, 1e-3, cfg.R)
    main = check_uniform_integrability(run, MollifierKernel.onesided_for(0.125, 2), 0.125, cfg.delta_seq,
                                       cfg.eps_seq, cfg.R)
    counter = check_uniform_integrability(run, MollifierKernel.onesided_for(0.375, 2), 0.375, cfg.delta_seq,
                                          cfg.eps_seq, cfg.R)
    dt = time.perf_counter() - t0
    ok = track_ok and gm.passed and main.passed and main.uniform_ratio <= 4 and not counter.passed and dt < 300
    report(8, ok, f"boundary error {e1:.2e} -> {e2:.2e}, gronwall rate {gm.rate:.3f} {gm.passed}, "
                  f"N*theta=0.5 ratio {main.uniform_ratio:.3f} {main.passed}, N*theta=1.5 flagged "
                  f"{not counter.passed}, {dt:.1f}s")


def test_criterion_9_mollification_rates():
    n = 4096
    dx = 1.0 / n
    x = (np.arange(n) + 0.5) * dx
    eps = 2.0 ** -np.arange(3, 9)
    c = verify_mollification_rates(cusp(x, x[n // 2], 0.5), dx, K, 0.5, np.inf, eps)
    s = verify_mollification_rates(np.sin(2 * np.pi * x), dx, K, 0.5, 2, eps, far_field="periodic")
    k = verify_mollification_rates(np.full(n, 2.0), dx, K, 0.5, 4, eps)
    const = all(e == 0 for e in k.error_norms)
    ok = 0.45 <= c.slope_error <= 0.55 and s.slope_gradient >= -0.1 and const
    report(9, ok, f"cusp slope {c.slope_error:.4f}, smooth gradient slope {s.slope_gradient:.4f}, constant exact {const}")
