"""Space-time mollification by direct summation with separable compact kernels.

Two kernel profiles are available:

``bump``
    ``(1 - s^2)^3`` on ``[-1, 1]`` in every coordinate (time included).
``onesided``
    ``(s (1 - s))^m`` on ``[0, 1]`` in time times ``(1 - |y|^2)^m`` on the unit
    ball in space.  With ``m * theta < 1`` the kernel has ``int eta^-theta < inf``.

Discrete stencils use midpoint weights renormalised so that constants are
reproduced exactly; derivative stencils are additionally corrected to have
zero sum and unit first moment, so linear data are differentiated exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import integrate

from .core import FlowField, VacuumNeighborhood

PROFILES = ("bump", "onesided")


@dataclass(frozen=True)
class MollifierKernel:
    profile: str = "bump"
    m: float = 3.0
    space_dim: int = 1

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown kernel profile {self.profile!r}")
        if self.space_dim not in (1, 2):
            raise ValueError("space_dim must be 1 or 2")
        if self.profile == "bump" and self.m != 3.0:
            raise ValueError("the bump profile has fixed exponent 3")
        if not self.m > 0:
            raise ValueError("kernel exponent must be positive")

    @classmethod
    def onesided_for(cls, theta: float, space_dim: int = 1) -> "MollifierKernel":
        """One-sided kernel whose exponent satisfies ``m * theta < 1``, C^1 when theta < 1."""
        m = 0.5 * (1.0 + 1.0 / theta) if theta < 1 else 0.5 / theta
        return cls("onesided", min(m, 2.0), space_dim)

    @property
    def symmetric_in_time(self) -> bool:
        return self.profile == "bump"

    @property
    def c1_smooth(self) -> bool:
        return self.profile == "bump" or self.m > 1

    @property
    def time_support(self) -> tuple[float, float]:
        return (-1.0, 1.0) if self.profile == "bump" else (0.0, 1.0)

    @property
    def support_radius(self) -> float:
        """Radius l of a ball in (t, x) containing the support."""
        if self.profile == "bump":
            return float(np.sqrt(1 + self.space_dim))
        return float(np.sqrt(2.0))

    # 1D factors (unnormalised)
    def time_factor(self, s):
        s = np.asarray(s, dtype=float)
        if self.profile == "bump":
            return np.where(np.abs(s) < 1, (1 - s * s) ** 3, 0.0)
        inside = (s > 0) & (s < 1)
        return np.where(inside, np.abs(s * (1 - s)) ** self.m, 0.0)

    def time_factor_deriv(self, s):
        s = np.asarray(s, dtype=float)
        if self.profile == "bump":
            return np.where(np.abs(s) < 1, -6 * s * (1 - s * s) ** 2, 0.0)
        inside = (s > 0) & (s < 1)
        base = np.abs(s * (1 - s))
        with np.errstate(all="ignore"):
            d = self.m * base ** (self.m - 1) * (1 - 2 * s)
        return np.where(inside, d, 0.0)

    def space_factor(self, y):
        """Radial space profile evaluated at |y|."""
        y = np.abs(np.asarray(y, dtype=float))
        e = 3.0 if self.profile == "bump" else self.m
        return np.where(y < 1, (1 - y * y) ** e, 0.0)

    def space_factor_deriv(self, y):
        y = np.asarray(y, dtype=float)
        e = 3.0 if self.profile == "bump" else self.m
        with np.errstate(all="ignore"):
            d = -2 * e * y * np.abs(1 - y * y) ** (e - 1)
        return np.where(np.abs(y) < 1, d, 0.0)

    @property
    def normalization(self) -> float:
        """Constant c with int c * eta_time * eta_space = 1."""
        return _normalization(self.profile, self.m, self.space_dim)

    def __call__(self, s, y):
        """Normalised kernel eta(s, y); ``y`` is a distance from the origin."""
        return self.normalization * self.time_factor(s) * self.space_factor(y)

    def integral(self) -> float:
        """Independent quadrature of the normalised kernel (should be 1)."""
        return _integral(self.profile, self.m, self.space_dim) * self.normalization

    def inverse_power_integral(self, theta: float, delta: float = 0.0) -> float:
        """int_supp (eta + delta)^-theta; finite for the one-sided kernel iff m*theta < 1."""
        c = self.normalization
        lo, hi = self.time_support
        sdim = self.space_dim

        def inner(y, s):
            w = 2 * np.pi * y if sdim == 2 else 2.0
            return w * (c * self.time_factor(s) * self.space_factor(y) + delta) ** (-theta)

        if delta == 0 and self.m * theta >= 1 and self.profile == "onesided":
            return float("inf")
        val, _ = integrate.dblquad(inner, lo, hi, 0.0, 1.0, epsabs=1e-10, epsrel=1e-8)
        return float(val)

    def to_json(self) -> str:
        return json.dumps({"profile": self.profile, "m": self.m, "space_dim": self.space_dim,
                           "l": self.support_radius}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MollifierKernel":
        d = json.loads(text)
        return cls(d["profile"], d["m"], d["space_dim"])


def _radial_moment(fun, sdim):
    if sdim == 1:
        return 2 * integrate.quad(fun, 0, 1, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return integrate.quad(lambda r: 2 * np.pi * r * fun(r), 0, 1, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


@lru_cache(maxsize=None)
def _integral(profile, m, sdim):
    k = MollifierKernel(profile, m, sdim)
    lo, hi = k.time_support
    it = integrate.quad(lambda s: float(k.time_factor(s)), lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return it * _radial_moment(lambda y: float(k.space_factor(y)), sdim)


@lru_cache(maxsize=None)
def _normalization(profile, m, sdim):
    if profile == "bump" and sdim == 1:
        return (35.0 / 32.0) ** 2
    return 1.0 / _integral(profile, m, sdim)


# -- discrete stencils -------------------------------------------------------------

@dataclass(frozen=True)
class Stencil:
    """out[i] = sum_j weights[j] * u[i - offsets[j]]."""

    offsets: np.ndarray
    weights: np.ndarray
    symmetric: bool


def _stencil(factor, dfactor, lo, hi, h, eps, derivative):
    if eps < h:
        raise ValueError(f"under-resolved kernel: epsilon={eps:g} is below the grid spacing {h:g}")
    j_lo = int(np.ceil(lo * eps / h - 1e-12))
    j_hi = int(np.floor(hi * eps / h + 1e-12))
    j = np.arange(j_lo, j_hi + 1)
    y = j * h
    w = factor(y / eps)
    keep = w > 0
    j, y, w = j[keep], y[keep], w[keep]
    if w.size == 0 or w.sum() <= 0:
        raise ValueError(f"under-resolved kernel: no stencil points for epsilon={eps:g}")
    w = w / w.sum()
    symmetric = lo == -hi
    if not derivative:
        return Stencil(j, w, symmetric)
    d = dfactor(y / eps) / eps
    d = d - w * d.sum()
    moment = -np.sum(y * d)
    if not moment > 0:
        raise ValueError(f"under-resolved kernel: derivative stencil degenerate at epsilon={eps:g}")
    d = d / moment
    if symmetric:
        # enforce exact antisymmetry so constants have exactly zero gradient
        pos = j > 0
        mirror = {int(a): b for a, b in zip(j[pos], d[pos])}
        d = np.array([0.0 if a == 0 else (mirror[a] if a > 0 else -mirror[-a]) for a in j])
    return Stencil(j, d, symmetric)


def space_stencil(kernel: MollifierKernel, h: float, eps: float, derivative: bool = False) -> Stencil:
    return _stencil(kernel.space_factor, kernel.space_factor_deriv, -1.0, 1.0, h, eps, derivative)


def time_stencil(kernel: MollifierKernel, h: float, eps: float, derivative: bool = False) -> Stencil:
    lo, hi = kernel.time_support
    return _stencil(kernel.time_factor, kernel.time_factor_deriv, lo, hi, h, eps, derivative)


def apply_stencil(u: np.ndarray, st: Stencil, axis: int = -1, mode: str = "zero", derivative=False) -> np.ndarray:
    """Direct summation along ``axis`` with zero, constant (edge) or periodic extension.

    Terms are accumulated in a fixed order, so results do not depend on
    evaluation order elsewhere.
    """
    u = np.moveaxis(np.asarray(u, dtype=float), axis, -1)
    n = u.shape[-1]
    pad = int(np.max(np.abs(st.offsets)))
    pad_width = [(0, 0)] * (u.ndim - 1) + [(pad, pad)]
    if mode == "zero":
        up = np.pad(u, pad_width, mode="constant")
    elif mode == "constant":
        up = np.pad(u, pad_width, mode="edge")
    elif mode == "periodic":
        if pad > n:
            raise ValueError("stencil wider than the periodic domain")
        up = np.pad(u, pad_width, mode="wrap")
    else:
        raise ValueError(f"unknown extension mode {mode!r}")

    def shifted(j):
        return up[..., pad - j: pad - j + n]

    if derivative:
        out = np.zeros_like(u)
        if st.symmetric:
            table = dict(zip(st.offsets.tolist(), st.weights.tolist()))
            for j in sorted(a for a in table if a > 0):
                out += table[j] * (shifted(j) - shifted(-j))
        else:
            for j, w in zip(st.offsets.tolist(), st.weights.tolist()):
                out += w * shifted(j)
        return np.moveaxis(out, -1, axis)
    # weights sum to one: accumulate differences so constants are reproduced exactly
    out = u.copy()
    if st.symmetric:
        table = dict(zip(st.offsets.tolist(), st.weights.tolist()))
        for j in sorted(a for a in table if a > 0):
            out += table[j] * ((shifted(j) - u) + (shifted(-j) - u))
    else:
        for j, w in zip(st.offsets.tolist(), st.weights.tolist()):
            if j:
                out += w * (shifted(j) - u)
    return np.moveaxis(out, -1, axis)


def convolve(
    values,
    kernel: MollifierKernel,
    epsilon: float,
    dx: float,
    dt: float | None = None,
    far_field: str = "zero",
    derivative: str | None = None,
) -> np.ndarray:
    """Mollify ``values`` of shape ``(n_cells,)`` (space only) or ``(n_frames, n_cells)``.

    Space-time mollification is used when ``dt`` is given.  ``derivative`` is
    ``None``, ``"x"`` or ``"t"``; derivatives fall on the kernel.  Time is
    always zero-extended; space uses ``far_field`` (``zero``, ``constant`` or
    ``periodic``).
    Extra trailing axes (vector components) are carried along.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    values = np.asarray(values, dtype=float)
    if derivative not in (None, "x", "t"):
        raise ValueError("derivative must be None, 'x' or 't'")
    if derivative == "t" and dt is None:
        raise ValueError("a time derivative needs space-time data (dt)")
    x_axis = 0 if dt is None else 1
    sx = space_stencil(kernel, dx, epsilon, derivative == "x")
    out = apply_stencil(values, sx, axis=x_axis, mode=far_field, derivative=derivative == "x")
    if dt is not None:
        st = time_stencil(kernel, dt, epsilon, derivative == "t")
        out = apply_stencil(out, st, axis=0, mode="zero", derivative=derivative == "t")
    return out


def _check_field(field: FlowField):
    if field.grid.geometry != "planar":
        raise NotImplementedError("direct mollification is implemented for planar grids only")
    if field.expanding:
        raise NotImplementedError("fields on an expanding mesh must be resampled first")


def mollify_field(field: FlowField, kernel: MollifierKernel, epsilon: float, spacetime: bool = True) -> FlowField:
    """Mollified density and momentum on the same grid.

    The result may carry nonzero momentum only where the mollified density is
    positive, because the kernel is nonnegative and |m| <= rho * |u|max.
    """
    _check_field(field)
    g = field.grid
    dt = g.dt if spacetime else None
    rho = convolve(field.rho, kernel, epsilon, g.dx, dt, field.far_field) if spacetime else \
        np.array([convolve(r, kernel, epsilon, g.dx, None, field.far_field) for r in field.rho])
    mom = convolve(field.mom, kernel, epsilon, g.dx, dt, field.far_field) if spacetime else \
        np.array([convolve(m, kernel, epsilon, g.dx, None, field.far_field) for m in field.mom])
    rho = np.where(rho > 0, rho, 0.0)
    mom = np.where(rho > 0, mom, 0.0)
    return replace(field, rho=rho, mom=mom, vel_closure=None, meta={**field.meta, "mollified": epsilon})


def gradient_mollified(values, kernel: MollifierKernel, epsilon: float, dx: float, dt=None, far_field="zero"):
    """Spatial gradient of the mollification, computed as u * grad(eta_eps)."""
    return convolve(values, kernel, epsilon, dx, dt, far_field, derivative="x")


def vacuum_mask(field: FlowField, kernel: MollifierKernel, epsilon: float, t1: float, t2: float,
                spacetime: bool = True) -> VacuumNeighborhood:
    """W_eps[t1, t2] = {rho_eps > 0}: exact positivity of a sum of nonnegative terms."""
    _check_field(field)
    g = field.grid
    if not (g.t_start - 1e-12 <= t1 < t2 <= g.t_end + 1e-12):
        raise ValueError(f"invalid window [{t1}, {t2}]")
    dt = g.dt if spacetime else None
    rho_eps = convolve(field.rho, kernel, epsilon, g.dx, dt, field.far_field)
    if not spacetime:
        rho_eps = np.array([convolve(r, kernel, epsilon, g.dx, None, field.far_field) for r in field.rho])
    sel = (g.t >= t1 - 1e-12) & (g.t <= t2 + 1e-12)
    return VacuumNeighborhood(epsilon, rho_eps[sel] > 0, g.t[sel])
