"""Commutator between mollification and a nonlinearity G(f, g).

For 1D data the commutator is

    C_eps = d/dx [G(f, g)_eps] - d/dx [G(f_eps, g_eps)]

with every derivative taken on the kernel, and the chain rule applied to the
second term.  It splits as C_eps = I + II + III where

    I   = d/dx G(f,g)_eps - D_fG(f,g) f_eps' - D_gG(f,g) g_eps'
    II  = [D_fG(f,g) - D_fG(f_eps,g_eps)] f_eps'
    III = [D_gG(f,g) - D_gG(f_eps,g_eps)] g_eps'

and its L^{q/2} norm is expected to decay like eps^min(a1(1+eta)-1, 2 a2-1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .besov import lq_norm, sawtooth
from .eos import EosParams
from .mollify import MollifierKernel, convolve, gradient_mollified, space_stencil
from .rates import fit_slope


@dataclass(frozen=True)
class Nonlinearity:
    name: str
    evaluate: Callable
    d_f: Callable
    d_g: Callable
    eta_holder: float

    def __post_init__(self):
        if not 0 < self.eta_holder <= 1:
            raise ValueError("eta_holder must lie in (0, 1]")

    def derivative_mismatch(self, f, g, h: float = 1e-6) -> float:
        """Largest relative gap between d_f, d_g and central differences of evaluate."""
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        hf = h * np.maximum(1.0, np.abs(f))
        hg = h * np.maximum(1.0, np.abs(g))
        fd_f = (self.evaluate(f + hf, g) - self.evaluate(np.maximum(f - hf, 0.0), g)) / (f + hf - np.maximum(f - hf, 0.0))
        fd_g = (self.evaluate(f, g + hg) - self.evaluate(f, g - hg)) / (2 * hg)
        rel = lambda a, b: np.max(np.abs(a - b) / (1.0 + np.abs(b)))
        return float(max(rel(fd_f, self.d_f(f, g)), rel(fd_g, self.d_g(f, g))))

    def holder_constant(self, f_max: float, g_max: float, n: int = 64) -> float:
        """Sampled sup of |D_fG(f1,g) - D_fG(f2,g)| / |f1-f2|^eta on the bounded box."""
        fs = np.linspace(0.0, f_max, n)
        gs = np.linspace(-g_max, g_max, 9)
        f1, f2 = np.meshgrid(fs, fs, indexing="ij")
        off = f1 != f2
        best = 0.0
        for g in gs:
            num = np.abs(self.d_f(f1, g) - self.d_f(f2, g))
            best = max(best, float(np.max(num[off] / np.abs(f1 - f2)[off] ** self.eta_holder)))
        return best


def affine(a: float = 1.0, b: float = 1.0, c: float = 0.0) -> Nonlinearity:
    return Nonlinearity(
        "affine",
        lambda f, g: a * f + b * g + c,
        lambda f, g: np.full(np.broadcast(f, g).shape, float(a)),
        lambda f, g: np.full(np.broadcast(f, g).shape, float(b)),
        1.0,
    )


def product() -> Nonlinearity:
    return Nonlinearity("product", lambda f, g: f * g, lambda f, g: g + 0.0 * f, lambda f, g: f + 0.0 * g, 1.0)


def pressure_law(params: EosParams) -> Nonlinearity:
    """G(f, g) = kappa f^gamma with eta = min(gamma, 2) - 1 (g unused)."""
    k, gm = params.kappa, params.gamma
    return Nonlinearity(
        "pressure",
        lambda f, g: k * np.asarray(f, dtype=float) ** gm + 0.0 * g,
        lambda f, g: k * gm * np.asarray(f, dtype=float) ** (gm - 1) + 0.0 * g,
        lambda f, g: np.zeros(np.broadcast(f, g).shape),
        min(gm, 2.0) - 1.0,
    )


def kinetic() -> Nonlinearity:
    """G(f, g) = f g^2 / 2, the kinetic energy density in (rho, u)."""
    return Nonlinearity(
        "kinetic",
        lambda f, g: 0.5 * f * g * g,
        lambda f, g: 0.5 * g * g + 0.0 * f,
        lambda f, g: f * g,
        1.0,
    )


NONLINEARITIES = {"affine": affine, "product": product, "kinetic": kinetic}


def _interior(n: int, dx: float, margin: float, far_field: str = "constant") -> slice:
    if far_field == "periodic":
        return slice(0, n)
    pad = int(np.ceil(margin / dx))
    if 2 * pad >= n:
        raise ValueError("interior window is empty")
    return slice(pad, n - pad)


def _check(f):
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        i = int(np.flatnonzero(f < 0)[0])
        raise ValueError(f"f must be nonnegative, found {f[i]} at cell {i}")
    return f


@dataclass(frozen=True)
class CommutatorParts:
    direct: np.ndarray
    I: np.ndarray
    II: np.ndarray
    III: np.ndarray
    I_integral: np.ndarray

    def identity_defect(self) -> float:
        return float(np.max(np.abs(self.I + self.II + self.III - self.direct), initial=0.0))


def commutator_parts(f, g, G: Nonlinearity, kernel: MollifierKernel, epsilon: float, dx: float,
                     window: slice | None = None, far_field: str = "constant") -> CommutatorParts:
    """Commutator and its three-term rearrangement on ``window``.

    ``I_integral`` evaluates term I from its difference-quotient form
    sum_y [G(z-y) - D_fG(z) Df - D_gG(z) Dg - G(z)] grad eta_eps(y).
    """
    f = _check(f)
    g = np.asarray(g, dtype=float)
    if window is None:
        window = _interior(f.size, dx, 2 * epsilon, far_field)
    Gfg = G.evaluate(f, g)
    dG_eps = gradient_mollified(Gfg, kernel, epsilon, dx, None, far_field)
    f_e = convolve(f, kernel, epsilon, dx, None, far_field)
    g_e = convolve(g, kernel, epsilon, dx, None, far_field)
    df_e = gradient_mollified(f, kernel, epsilon, dx, None, far_field)
    dg_e = gradient_mollified(g, kernel, epsilon, dx, None, far_field)
    Df, Dg = G.d_f(f, g), G.d_g(f, g)
    Df_e, Dg_e = G.d_f(f_e, g_e), G.d_g(f_e, g_e)
    direct = dG_eps - (Df_e * df_e + Dg_e * dg_e)
    I = dG_eps - Df * df_e - Dg * dg_e
    II = (Df - Df_e) * df_e
    III = (Dg - Dg_e) * dg_e
    # difference-quotient form of I: the stencil has zero sum, so constants in z drop out
    st = space_stencil(kernel, dx, epsilon, derivative=True)
    pad = int(np.max(np.abs(st.offsets)))
    mode = {"constant": "edge", "zero": "constant", "periodic": "wrap"}[far_field]
    fp, gp, Gp = (np.pad(a, pad, mode=mode) for a in (f, g, Gfg))
    n = f.size
    I_int = np.zeros(n)
    for j, w in zip(st.offsets.tolist(), st.weights.tolist()):
        sl = slice(pad - j, pad - j + n)
        I_int += w * (Gp[sl] - Df * (fp[sl] - f) - Dg * (gp[sl] - g) - Gfg)
    return CommutatorParts(direct[window], I[window], II[window], III[window], I_int[window])


def commutator_field(f, g, G: Nonlinearity, kernel: MollifierKernel, epsilon: float, dx: float,
                     window: slice | None = None, far_field: str = "constant") -> np.ndarray:
    return commutator_parts(f, g, G, kernel, epsilon, dx, window, far_field).direct


@dataclass(frozen=True)
class RateReport:
    eps: tuple
    norms: tuple
    fitted_slope: float
    predicted_slope: float
    passed: bool
    vacuous: bool
    tol: float = 0.1

    @property
    def status(self) -> str:
        if self.vacuous:
            return "vacuous regime"
        return "pass" if self.passed else "fail"

    def rows(self):
        return list(zip(self.eps, self.norms))


def predicted_slope(alpha1: float, alpha2: float, eta: float) -> float:
    return min(alpha1 * (1 + eta) - 1, 2 * alpha2 - 1)


def measure_rate(f, g, G: Nonlinearity, kernel: MollifierKernel, alpha1: float, alpha2: float, q: float,
                 eps_sequence, dx: float, window: slice | None = None, far_field: str = "constant",
                 tol: float = 0.1) -> RateReport:
    """Fit the L^{q/2} decay of the commutator; the coarsest epsilon is dropped from the fit."""
    if q < 2:
        raise ValueError(f"q must be at least 2, got {q}")
    eps = np.sort(np.asarray(eps_sequence, dtype=float))[::-1]
    if eps.size < 4:
        raise ValueError("need at least four epsilons")
    f = _check(f)
    if window is None:
        window = _interior(f.size, dx, 2 * eps[0], far_field)
    norms = np.array([
        lq_norm(commutator_field(f, g, G, kernel, e, dx, window, far_field), q / 2, dx) for e in eps
    ])
    pred = predicted_slope(alpha1, alpha2, G.eta_holder)
    slope = fit_slope(eps, norms, drop_first=True)
    if np.all(norms == 0):
        slope = float("inf")
    vacuous = pred <= 0
    passed = bool(slope >= pred - tol) if not vacuous else True
    return RateReport(tuple(eps), tuple(norms), float(slope), pred, passed, vacuous, tol)


def weierstrass_field(x, alpha: float, phase: float = 0.0, k_max: int | None = None, dx: float | None = None,
                      offset: float = 0.0):
    """Nonnegative sawtooth sum  offset + sum_k 2^(-alpha k) saw(2^k x + phase).

    The phase is the same for every mode, so on the unit period the field
    satisfies W(x) = saw(x + phase) + 2^-alpha W(2x): measured rates are then
    free of the log-periodic scatter that per-mode phases introduce.  Modes
    stop at the grid scale (2^k_max ~ 1/(4 dx)) by default.
    """
    x = np.asarray(x, dtype=float)
    if k_max is None:
        if dx is None:
            dx = float(np.min(np.diff(x)))
        k_max = max(1, int(np.log2(1.0 / (4 * dx))))
    out = np.zeros_like(x)
    for k in range(k_max + 1):
        out += 2.0 ** (-alpha * k) * sawtooth(2.0**k * x + phase)
    return out + offset
