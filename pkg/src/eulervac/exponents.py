"""Exponent bookkeeping for the epsilon-scaling delta = eps^kappa_exp, sigma = eps^nu.

The constraint that the scaled residuals vanish as eps -> 0 is a system of
seven strict linear inequalities in (kappa_exp, nu).  When alpha >= beta it
reduces to five.  Both systems use the regularisation exponent q_tilde: the
kappa_exp/q terms come from the factor delta^(-1/q_tilde) in the bound on
1/r_eps^delta, so ``q`` below is only validated, never substituted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INF = float("inf")


def _min2(gamma: float) -> float:
    return min(gamma, 2.0)


def hessian_power(gamma: float) -> float:
    """Coefficient (gamma-2)/(min(gamma,2)-1) multiplying nu."""
    return (gamma - 2.0) / (_min2(gamma) - 1.0)


def _check_beta(gamma: float, beta: float):
    if not gamma > 1:
        raise ValueError(f"gamma must exceed 1, got {gamma}")
    lo = 1.0 / _min2(gamma)
    if not (lo < beta <= 1.0):
        raise ValueError(
            f"beta={beta} outside the admissible range ({lo:.6g}, 1]: a strong solution needs "
            f"alpha >= beta > 1/min(2, gamma)"
        )


def theta_threshold(gamma: float, beta: float) -> float:
    """Lower bound on the vacuum-integrability exponent theta."""
    _check_beta(gamma, beta)
    if gamma < 2:
        g1 = gamma - 1.0
        return 4 * gamma**2 * (1 - beta) / (g1 * (g1**2 * beta + 1 - beta))
    return 4 * gamma / (gamma - 1) * (1 - beta) / beta


def p_exponent(gamma: float, theta: float) -> float:
    return (gamma - 1) * theta / (4 * gamma)


def q_tilde(gamma: float, theta: float) -> float:
    """[4 gamma/((gamma-1) theta) - 1]^-1, or inf when theta >= 4 gamma/(gamma-1)."""
    d = 4 * gamma / ((gamma - 1) * theta) - 1
    return 1.0 / d if d > 0 else INF


@dataclass(frozen=True)
class ExponentWindow:
    gamma: float
    alpha: float
    beta: float
    theta: float
    q: float
    kappa_range: tuple
    nu_range: tuple
    p_exp: float
    q_tilde: float
    feasible: bool
    reasons: tuple = field(default_factory=tuple)

    @property
    def unbounded_kappa(self) -> bool:
        return math.isinf(self.kappa_range[1])

    def midpoint(self) -> tuple[float, float]:
        return _interior(self.kappa_range, 0.5), _interior(self.nu_range, 0.5)

    def interior_samples(self, n: int = 5) -> list[tuple[float, float]]:
        fr = (np.arange(n) + 0.5) / n
        return [(_interior(self.kappa_range, a), _interior(self.nu_range, b)) for a in fr for b in fr]

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "alpha": self.alpha,
            "beta": self.beta,
            "theta": self.theta,
            "q": self.q,
            "kappa_exp_range": list(self.kappa_range),
            "nu_range": list(self.nu_range),
            "p_exp": self.p_exp,
            "q_tilde": self.q_tilde,
            "feasible": self.feasible,
            "reasons": list(self.reasons),
        }


def _interior(rng, frac):
    lo, hi = rng
    if math.isinf(hi):
        hi = lo + max(1.0, abs(lo))
    return lo + frac * (hi - lo)


FULL_NAMES = (
    "kappa+alpha-1",
    "kappa+h*nu+beta-1",
    "nu+beta-1",
    "-kappa/qt+2alpha-1",
    "-kappa/qt+min(g,2)beta-1",
    "h*nu+2alpha-1",
    "h*nu+2beta-1",
)
REDUCED_NAMES = (
    "kappa+beta-1",
    "kappa+h*nu+beta-1",
    "nu+beta-1",
    "-kappa/qt+min(g,2)beta-1",
    "h*nu+2beta-1",
)


def _kq(kappa, qt):
    return 0.0 if math.isinf(qt) else kappa / qt


def full_slacks(gamma, alpha, beta, qt, kappa, nu) -> np.ndarray:
    h = hessian_power(gamma)
    m = _min2(gamma)
    kq = _kq(kappa, qt)
    return np.array([
        kappa + alpha - 1,
        kappa + h * nu + beta - 1,
        nu + beta - 1,
        -kq + 2 * alpha - 1,
        -kq + m * beta - 1,
        h * nu + 2 * alpha - 1,
        h * nu + 2 * beta - 1,
    ])


def reduced_slacks(gamma, beta, qt, kappa, nu) -> np.ndarray:
    h = hessian_power(gamma)
    kq = _kq(kappa, qt)
    return np.array([
        kappa + beta - 1,
        kappa + h * nu + beta - 1,
        nu + beta - 1,
        -kq + _min2(gamma) * beta - 1,
        h * nu + 2 * beta - 1,
    ])


@dataclass(frozen=True)
class SystemReport:
    kappa: float
    nu: float
    slacks: dict
    passed: bool

    def failing(self) -> list[str]:
        return [k for k, v in self.slacks.items() if not v > 0]


def verify_full_system(window: ExponentWindow, kappa: float, nu: float) -> SystemReport:
    s = full_slacks(window.gamma, window.alpha, window.beta, window.q_tilde, kappa, nu)
    slacks = dict(zip(FULL_NAMES, map(float, s)))
    return SystemReport(kappa, nu, slacks, bool(np.all(s > 0)))


def verify_reduced_system(window: ExponentWindow, kappa: float, nu: float) -> SystemReport:
    s = reduced_slacks(window.gamma, window.beta, window.q_tilde, kappa, nu)
    slacks = dict(zip(REDUCED_NAMES, map(float, s)))
    return SystemReport(kappa, nu, slacks, bool(np.all(s > 0)))


def solve_window(gamma: float, alpha: float, beta: float, theta: float, q: float) -> ExponentWindow:
    """Explicit (kappa_exp, nu) window; infeasible results carry reasons."""
    _check_beta(gamma, beta)
    if alpha < beta:
        raise ValueError(f"need alpha >= beta, got alpha={alpha}, beta={beta}")
    if not theta > 0:
        raise ValueError("theta must be positive")
    reasons = []
    if q < 2 * gamma / (gamma - 1):
        reasons.append(f"q={q} below 2 gamma/(gamma-1) = {2 * gamma / (gamma - 1):.6g}")
    thr = theta_threshold(gamma, beta)
    if not theta > thr:
        reasons.append(f"theta={theta} does not exceed the threshold {thr:.6g}")
    qt = q_tilde(gamma, theta)
    p = p_exponent(gamma, theta)
    if gamma < 2:
        n_lo = 1 - beta
        n_hi = min((gamma - 1) * (2 * beta - 1) / (2 - gamma), (1 - beta) / (2 - gamma))
        # kappa + h nu + beta - 1 > 0 must hold up to nu = n_hi; equals gamma(1-beta)/(gamma-1)
        # when the second nu bound binds, and is smaller otherwise
        k_lo = 1 - beta + n_hi * (2 - gamma) / (gamma - 1)
        k_hi = qt * (gamma * beta - 1)
    else:
        k_lo = 1 - beta
        k_hi = qt * (2 * beta - 1)
        n_lo, n_hi = 1 - beta, INF
    if not k_lo < k_hi:
        reasons.append(f"empty kappa_exp window ({k_lo:.6g}, {k_hi:.6g})")
    if not n_lo < n_hi:
        reasons.append(f"empty nu window ({n_lo:.6g}, {n_hi:.6g})")
    feasible = not reasons
    w = ExponentWindow(gamma, alpha, beta, theta, q, (k_lo, k_hi), (n_lo, n_hi), p, qt, feasible, tuple(reasons))
    if feasible:
        bad = [s for s in w.interior_samples() if not verify_full_system(w, *s).passed]
        if bad:
            return ExponentWindow(gamma, alpha, beta, theta, q, (k_lo, k_hi), (n_lo, n_hi), p, qt, False,
                                  (f"window fails the full system at {bad[0]}",))
    return w


def exterior_probes(window: ExponentWindow, h: float = 1e-3) -> list[tuple[float, float]]:
    """Points just outside each finite window endpoint.

    For gamma < 2 the window is a rectangle inside a slanted feasible set: the
    lower kappa_exp endpoint binds together with a large nu and the upper nu
    endpoint together with a small kappa_exp, so those probes sit near the
    opposite corner.
    """
    (k_lo, k_hi), (n_lo, n_hi) = window.kappa_range, window.nu_range
    k_mid, n_mid = window.midpoint()
    slanted = window.gamma < 2
    hc = abs(hessian_power(window.gamma))
    n_top = n_hi - h * min(1.0, hc) / 10 if math.isfinite(n_hi) else n_mid
    k_bot = k_lo + h * min(1.0, hc) / 10
    pts = [(k_lo - h, n_top if slanted else n_mid), (k_mid, n_lo - h)]
    if math.isfinite(k_hi):
        pts.append((k_hi + h, n_mid))
    if math.isfinite(n_hi):
        pts.append((k_bot if slanted else k_mid, n_hi + h))
    return pts
