"""Finite-difference Besov seminorm estimates and mollification-rate checks.

Membership in B^{alpha,infty}_q is used only through two inequalities,

    ||u_eps - u||_{L^q} <= C eps^alpha,    ||grad u_eps||_{L^q} <= C eps^(alpha-1),

so the estimator here works directly with difference quotients and measured
log-log slopes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mollify import MollifierKernel, convolve, gradient_mollified
from .rates import fit_slope


def lq_norm(v, q: float, dx: float) -> float:
    """Discrete L^q norm with cell measure ``dx``; ``q = inf`` gives the max norm."""
    v = np.abs(np.asarray(v, dtype=float)).ravel()
    if v.size == 0:
        return 0.0
    if np.isinf(q):
        return float(v.max())
    m = v.max()
    if m == 0:
        return 0.0
    # scale first so large q does not overflow
    return float(m * (np.sum((v / m) ** q) * dx) ** (1.0 / q))


@dataclass(frozen=True)
class BesovEstimate:
    alpha: float
    q: float
    seminorm: float
    shift_range: tuple
    samples: tuple  # ((h, ||Delta_h u||_q), ...)

    def ratios(self) -> np.ndarray:
        return np.array([n / h**self.alpha for h, n in self.samples])


def default_shifts(dx: float, n_cells: int, k0: int = 0) -> np.ndarray:
    """Dyadic shifts 2^k dx spanning about two decades, capped at n_cells/8."""
    k_max = max(k0 + 1, min(k0 + 7, int(np.log2(max(n_cells // 8, 2)))))
    return dx * 2.0 ** np.arange(k0, k_max + 1)


def difference_norm(values, shift_cells: int, q: float, dx: float, axis: int = -1) -> float:
    """||u(. + h) - u||_{L^q} over the indices where both samples exist."""
    u = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    n = u.shape[-1]
    if not 0 < shift_cells < n:
        raise ValueError(f"shift of {shift_cells} cells leaves the grid of {n} cells")
    d = u[..., shift_cells:] - u[..., :-shift_cells]
    return lq_norm(d, q, dx)


def estimate_seminorm(values, alpha: float, q: float, shifts, dx: float, dt: float | None = None,
                      time_shifts=()) -> BesovEstimate:
    """Sup over the given shifts of ||Delta_h u||_{L^q} / h^alpha.

    ``values`` is 1D (space) or 2D ``(frames, cells)``; space shifts act on the
    last axis, ``time_shifts`` (with ``dt``) on the first.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not q >= 1:
        raise ValueError(f"q must be at least 1, got {q}")
    shifts = list(np.atleast_1d(np.asarray(shifts, dtype=float))) if shifts is not None else []
    time_shifts = list(time_shifts)
    if not shifts and not time_shifts:
        raise ValueError("empty shift set")
    values = np.asarray(values, dtype=float)
    measure = dx if dt is None else dx * dt
    samples = []
    for h in shifts:
        k = int(round(h / dx))
        if k < 1 or abs(k * dx - h) > 1e-9 * max(h, dx):
            raise ValueError(f"shift {h} is not a positive multiple of the cell width {dx}")
        samples.append((k * dx, difference_norm(values, k, q, measure, axis=-1)))
    for h in time_shifts:
        if dt is None or values.ndim < 2:
            raise ValueError("time shifts need space-time data and dt")
        k = int(round(h / dt))
        if k < 1:
            raise ValueError(f"time shift {h} below the frame spacing {dt}")
        samples.append((k * dt, difference_norm(values, k, q, measure, axis=0)))
    hs = [h for h, _ in samples]
    semi = max(n / h**alpha for h, n in samples)
    return BesovEstimate(alpha, q, float(semi), (min(hs), max(hs)), tuple(samples))


@dataclass(frozen=True)
class MollificationRateReport:
    alpha: float
    q: float
    eps: tuple
    error_norms: tuple
    gradient_norms: tuple
    slope_error: float  # nan when the fit is skipped (all norms zero)
    slope_gradient: float
    tol: float
    passed: bool

    def rows(self):
        return [(e, a, b) for e, a, b in zip(self.eps, self.error_norms, self.gradient_norms)]


def verify_mollification_rates(values, dx: float, kernel: MollifierKernel, alpha: float, q: float,
                               eps_sequence, far_field: str = "constant", window=None,
                               tol: float = 0.05) -> MollificationRateReport:
    """Measure both mollification rates of 1D data on a fixed interior window.

    The window defaults to the cells at distance >= 2 * max(eps) from both
    ends so every epsilon is measured on the same set.
    """
    eps = np.sort(np.asarray(eps_sequence, dtype=float))[::-1]
    if eps.size < 3:
        raise ValueError("need at least three epsilons")
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if window is None:
        pad = int(np.ceil(2 * eps[0] / dx))
        window = slice(pad, n - pad)
    if len(range(*window.indices(n))) < 1:
        raise ValueError("interior window is empty for the largest epsilon")
    errs, grads = [], []
    for e in eps:
        ue = convolve(values, kernel, e, dx, None, far_field)
        ge = gradient_mollified(values, kernel, e, dx, None, far_field)
        errs.append(lq_norm((ue - values)[..., window], q, dx))
        grads.append(lq_norm(ge[..., window], q, dx))
    errs, grads = np.array(errs), np.array(grads)
    s1 = fit_slope(eps, errs) if np.any(errs > 0) else float("nan")
    s2 = fit_slope(eps, grads) if np.any(grads > 0) else float("nan")
    ok1 = np.isnan(s1) or s1 >= alpha - tol
    ok2 = np.isnan(s2) or s2 >= alpha - 1 - tol
    return MollificationRateReport(alpha, q, tuple(eps), tuple(errs), tuple(grads), s1, s2, tol, bool(ok1 and ok2))


def cusp(x, x0: float = 0.5, a: float = 0.5):
    return np.abs(np.asarray(x, dtype=float) - x0) ** a


def sawtooth(x):
    """1-periodic triangle wave with values in [0, 1/2]."""
    x = np.asarray(x, dtype=float)
    return np.abs(x - np.floor(x + 0.5))


def weierstrass_saw(x, alpha: float, k_max: int = 12, k_min: int = 0):
    """sum_k 2^(-alpha k) saw(2^k x): exact B^{alpha,infty}_infty scaling up to 2^-k_max."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k in range(k_min, k_max + 1):
        out += 2.0 ** (-alpha * k) * sawtooth(2.0**k * x)
    return out
