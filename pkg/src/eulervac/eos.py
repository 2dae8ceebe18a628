"""Power-law pressure, its potential, and a C^2 smoothing of the potential near vacuum.

For ``1 < gamma < 2`` the potential ``H(z) = kappa/(gamma-1) z^gamma`` has an
unbounded second derivative at ``z = 0``.  :func:`build_smoothed` replaces it
below the crossover ``z0 = sigma^(1/(gamma-1))`` by its second-order Taylor
polynomial at ``z0``, which keeps ``H_sigma`` in C^2 and makes every error
constant explicit.  The smoothed pressure is rebuilt from ``p'_s = z H''_s``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EosParams:
    kappa: float = 1.0
    gamma: float = 2.0
    rho_max: float = 10.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.rho_max > 0:
            raise ValueError("rho_max must be positive")

    def to_dict(self) -> dict:
        return {"kappa": self.kappa, "gamma": self.gamma, "rho_max": self.rho_max}


def _check_rho(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError(f"density must be nonnegative, got min {rho.min()}")
    return rho


def pressure(params: EosParams, rho):
    rho = _check_rho(rho)
    return params.kappa * rho**params.gamma


def pressure_derivative(params: EosParams, rho):
    rho = _check_rho(rho)
    return params.kappa * params.gamma * rho ** (params.gamma - 1)


def sound_speed(params: EosParams, rho):
    return np.sqrt(pressure_derivative(params, rho))


def pressure_potential(params: EosParams, rho):
    """H(rho) = kappa/(gamma-1) rho^gamma, so that rho H' - H = p."""
    rho = _check_rho(rho)
    return params.kappa / (params.gamma - 1) * rho**params.gamma


def potential_derivative(params: EosParams, rho):
    rho = _check_rho(rho)
    g = params.gamma
    return params.kappa * g / (g - 1) * rho ** (g - 1)


def potential_second_derivative(params: EosParams, rho):
    """H''(rho) = kappa gamma rho^(gamma-2); infinite at 0 when gamma < 2."""
    rho = _check_rho(rho)
    g = params.gamma
    with np.errstate(divide="ignore"):
        return params.kappa * g * rho ** (g - 2)


def hessian_exponent(gamma: float) -> float:
    """(gamma-2)/(min(gamma,2)-1), the sigma power bounding sup |H''_sigma|."""
    return (gamma - 2.0) / (min(gamma, 2.0) - 1.0)


@dataclass(frozen=True)
class SmoothedEos:
    """Regularised pair (H_sigma, p_sigma) with sampled error constants.

    ``a1``, ``a2`` and ``b`` are the smallest constants for which

        sup |H - H_s| + |H' - H'_s|   <= a1 * sigma
        sup |H''_s|                   <= a2 * sigma^hessian_exponent(gamma)
        sup |p - p_s| + |p' - p'_s|   <= b * sigma

    hold on the dense sample of [0, rho_max] used at construction.
    """

    base: EosParams
    sigma: float
    z0: float
    a1: float
    a2: float
    b: float

    @property
    def exact(self) -> bool:
        return self.base.gamma >= 2

    def H(self, z):
        z = _check_rho(z)
        h = pressure_potential(self.base, z)
        if self.exact:
            return h
        d = z - self.z0
        h0 = pressure_potential(self.base, self.z0)
        h1 = potential_derivative(self.base, self.z0)
        h2 = potential_second_derivative(self.base, self.z0)
        return np.where(z < self.z0, h0 + h1 * d + 0.5 * h2 * d * d, h)

    def dH(self, z):
        z = _check_rho(z)
        h = potential_derivative(self.base, z)
        if self.exact:
            return h
        h1 = potential_derivative(self.base, self.z0)
        h2 = potential_second_derivative(self.base, self.z0)
        return np.where(z < self.z0, h1 + h2 * (z - self.z0), h)

    def d2H(self, z):
        z = _check_rho(z)
        h = potential_second_derivative(self.base, z)
        if self.exact:
            return h
        h2 = potential_second_derivative(self.base, self.z0)
        with np.errstate(invalid="ignore"):
            return np.where(z < self.z0, h2, h)

    def p(self, z):
        z = _check_rho(z)
        p = pressure(self.base, z)
        if self.exact:
            return p
        # p_s(z) = p(z0) - int_z^z0 s H''_s(s) ds with H''_s constant below z0
        h2 = potential_second_derivative(self.base, self.z0)
        p0 = pressure(self.base, self.z0)
        return np.where(z < self.z0, p0 - 0.5 * h2 * (self.z0**2 - z * z), p)

    def dp(self, z):
        z = _check_rho(z)
        dp = pressure_derivative(self.base, z)
        if self.exact:
            return dp
        h2 = potential_second_derivative(self.base, self.z0)
        return np.where(z < self.z0, z * h2, dp)

    def to_json(self) -> str:
        return json.dumps(
            {"base": self.base.to_dict(), "sigma": self.sigma, "z0": self.z0,
             "a1": self.a1, "a2": self.a2, "b": self.b},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "SmoothedEos":
        d = json.loads(text)
        return cls(EosParams(**d["base"]), d["sigma"], d["z0"], d["a1"], d["a2"], d["b"])


def sample_points(rho_max: float, z0: float, n: int = 10_000) -> np.ndarray:
    """Dense sample of [0, rho_max] that also resolves [0, z0]."""
    pts = [np.linspace(0.0, rho_max, n)]
    if 0 < z0 < rho_max:
        pts.append(np.linspace(0.0, z0, n // 2))
        pts.append(z0 * (1 + np.linspace(0, 1, n // 4) ** 2))
    z = np.unique(np.concatenate(pts))
    return z[z <= rho_max]


def smoothing_errors(s: SmoothedEos, z=None) -> dict:
    """Sampled sup-norm errors that define the constants of ``s``."""
    base = s.base
    if z is None:
        z = sample_points(base.rho_max, s.z0)
    eH = np.abs(pressure_potential(base, z) - s.H(z)) + np.abs(potential_derivative(base, z) - s.dH(z))
    ep = np.abs(pressure(base, z) - s.p(z)) + np.abs(pressure_derivative(base, z) - s.dp(z))
    h2 = s.d2H(z)
    return {"H": float(np.max(eH)), "p": float(np.max(ep)), "d2H": float(np.max(np.abs(h2)))}


def build_smoothed(params: EosParams, sigma: float) -> SmoothedEos:
    if not 0 < sigma <= 1:
        raise ValueError(f"sigma must lie in (0, 1], got {sigma}")
    g = params.gamma
    z0 = sigma ** (1.0 / (g - 1.0)) if g < 2 else 0.0
    trial = SmoothedEos(params, sigma, z0, 0.0, 0.0, 0.0)
    if g >= 2:
        z = np.linspace(0.0, params.rho_max, 10_000)
        a2 = float(np.max(np.abs(potential_second_derivative(params, z)))) / sigma ** hessian_exponent(g)
        return SmoothedEos(params, sigma, z0, 0.0, a2, 0.0)
    err = smoothing_errors(trial)
    return SmoothedEos(
        params,
        sigma,
        z0,
        a1=err["H"] / sigma,
        a2=err["d2H"] / sigma ** hessian_exponent(g),
        b=err["p"] / sigma,
    )
