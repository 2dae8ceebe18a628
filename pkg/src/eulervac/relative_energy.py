"""Relative energy between a weak and a strong solution, and the residuals of the mollified strong system.

The relative energy density is

    E(rho, u | r, v) = 1/2 rho |u - v|^2 + H(rho) - H'(r)(rho - r) - H(r)

and E_sigma replaces (H, H') by (H_sigma, H'_sigma) in the r-terms.  Spatial
integrals use the midpoint rule on cells and time integrals the trapezoid
rule on frames.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import FlowField
from .eos import (
    EosParams,
    SmoothedEos,
    potential_derivative,
    pressure,
    pressure_derivative,
    pressure_potential,
)
from .mollify import MollifierKernel, convolve
from .rates import fit_slope


def _same_grid(a: FlowField, b: FlowField):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")
    if (a.mesh_scale is None) != (b.mesh_scale is None) or (
        a.mesh_scale is not None and not np.array_equal(a.mesh_scale, b.mesh_scale)
    ):
        raise ValueError("grid mismatch: fields live on different expanding meshes")


def energy_density(rho, u, r, v, params: EosParams, smoothed: SmoothedEos | None = None):
    """Cell-wise relative energy; with ``smoothed`` the r-terms use (H_sigma, H'_sigma)."""
    rho = np.asarray(rho, dtype=float)
    r = np.asarray(r, dtype=float)
    du = np.asarray(u, dtype=float) - np.asarray(v, dtype=float)
    kin = 0.5 * rho * du * du
    if smoothed is None:
        hr, dhr = pressure_potential(params, r), potential_derivative(params, r)
    else:
        hr, dhr = smoothed.H(r), smoothed.dH(r)
    return kin + pressure_potential(params, rho) - dhr * (rho - r) - hr


def _frame(field: FlowField, t: float) -> int:
    return field.grid.frame_index(t)


def relative_energy(weak: FlowField, strong: FlowField, params: EosParams, t: float, check: bool = True) -> float:
    """Integral of E(rho, u | r, v) over the grid at output time ``t``.

    The strong velocity on vacuum cells comes from its closure (zero if none);
    the weak velocity there is irrelevant because it is multiplied by rho = 0.
    """
    _same_grid(weak, strong)
    k = _frame(weak, t)
    e = energy_density(weak.rho[k], weak.velocity()[k], strong.rho[k], strong.velocity()[k], params)
    if check:
        scale = 1e-12 * (1.0 + np.max(pressure_potential(params, weak.rho[k])) + np.max(weak.rho[k] * weak.velocity()[k] ** 2))
        if np.any(e < -scale):
            i = int(np.argmin(e))
            raise AssertionError(f"relative energy density negative ({e[i]:.3e}) at cell {i}")
    return float(np.sum(e * weak.cell_volumes(k)))


def relative_energy_smoothed(weak: FlowField, strong: FlowField, smoothed: SmoothedEos, t: float) -> float:
    _same_grid(weak, strong)
    k = _frame(weak, t)
    e = energy_density(weak.rho[k], weak.velocity()[k], strong.rho[k], strong.velocity()[k], smoothed.base, smoothed)
    return float(np.sum(e * weak.cell_volumes(k)))


def relative_energy_series(weak: FlowField, strong: FlowField, params: EosParams) -> np.ndarray:
    return np.array([relative_energy(weak, strong, params, t) for t in weak.grid.t])


def young_constant(gamma: float) -> float:
    """C(gamma) with rho^a |u|^a <= C (rho^gamma + rho |u|^2), a = 2 gamma/(gamma+1).

    Young's inequality with exponents 2/a and 2/(2-a) gives the weights a/2
    and 1 - a/2; the larger one is a/2 = gamma/(gamma+1).
    """
    return gamma / (gamma + 1.0)


def holder_pair(gamma: float) -> tuple[float, float]:
    """(s, s') = (2 gamma/(gamma-1), 2 gamma/(gamma+1))."""
    return 2 * gamma / (gamma - 1), 2 * gamma / (gamma + 1)


# -- regularised density -----------------------------------------------------------

def c_qtilde(q_tilde: float) -> float:
    """Constant in (r^d - r)/r^d <= C delta / r^p, from 1 - (1+x)^-B <= (1+B) x with B = 1/q_tilde."""
    return 1.0 + (0.0 if np.isinf(q_tilde) else 1.0 / q_tilde)


@dataclass(frozen=True)
class RegularizedDensity:
    r_eps: np.ndarray
    delta: float
    p_exp: float
    q_tilde: float
    r_eps_delta: np.ndarray

    @property
    def positive(self) -> np.ndarray:
        return self.r_eps > 0

    def invariant_defects(self) -> dict:
        """Largest violation (positive = violated) of the three pointwise bounds."""
        pos = self.positive
        r, rd = self.r_eps[pos], self.r_eps_delta[pos]
        if r.size == 0:
            return {"monotone": 0.0, "ratio": 0.0, "inverse": 0.0}
        B = 0.0 if np.isinf(self.q_tilde) else 1.0 / self.q_tilde
        out = {"monotone": float(np.max(r - rd))}
        small = r <= 1
        if np.any(small):
            lhs = (rd[small] - r[small]) / rd[small]
            rhs = c_qtilde(self.q_tilde) * self.delta / r[small] ** self.p_exp
            out["ratio"] = float(np.max(lhs - rhs))
        else:
            out["ratio"] = 0.0
        if B > 0:
            bound = self.delta ** (-B) / r ** (1 - self.p_exp * B)
            out["inverse"] = float(np.max((1 / rd - bound) / bound))
        else:
            out["inverse"] = 0.0
        return out


def regularize_density(r_eps, delta: float, p_exp: float, q_tilde: float) -> RegularizedDensity:
    """r_eps (1 + delta / r_eps^p)^(1/q_tilde) on {r_eps > 0}, zero elsewhere."""
    if not delta > 0 or not p_exp > 0 or not q_tilde > 0:
        raise ValueError("delta, p and q_tilde must be positive")
    r = np.asarray(r_eps, dtype=float)
    B = 0.0 if np.isinf(q_tilde) else 1.0 / q_tilde
    out = np.zeros_like(r)
    pos = r > 0
    # log form avoids overflow of delta / r^p for tiny r
    rp = r[pos]
    out[pos] = rp * np.exp(B * np.logaddexp(0.0, np.log(delta) - p_exp * np.log(rp)))
    return RegularizedDensity(r, float(delta), float(p_exp), float(q_tilde), out)


# -- mollified residuals -----------------------------------------------------------

@dataclass(frozen=True)
class ResidualBundle:
    """Residual fields on the frames ``frames`` and cells ``cells`` of the strong field's grid."""

    r1: np.ndarray
    r1_alt: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    m_delta: np.ndarray
    r_eps: np.ndarray
    v_eps: np.ndarray
    rho_weak: np.ndarray
    d2H_r: np.ndarray
    mask: np.ndarray
    epsilon: float
    sigma: float
    delta: float
    gamma: float
    cell_measure: float
    meta: dict = field(default_factory=dict)

    def r1_defect(self) -> float:
        return float(np.max(np.abs(self.r1 - self.r1_alt), initial=0.0))


def _window(strong: FlowField, kernel: MollifierKernel, epsilon: float, far_field: str):
    g = strong.grid
    lo, hi = kernel.time_support
    t = g.t
    keep = (t >= g.t_start + max(hi, 0.0) * epsilon - 1e-12) & (t <= g.t_end + min(lo, 0.0) * epsilon + 1e-12)
    frames = np.flatnonzero(keep)
    if frames.size < 2:
        raise ValueError(f"time window too small after shrinking by epsilon={epsilon:g}")
    if far_field == "periodic":
        cells = slice(0, g.n_cells)
    else:
        pad = int(np.ceil(2 * epsilon / g.dx))
        if 2 * pad >= g.n_cells:
            raise ValueError("spatial window empty after shrinking")
        cells = slice(pad, g.n_cells - pad)
    return slice(frames[0], frames[-1] + 1), cells


def mollified_residuals(
    strong: FlowField,
    kernel: MollifierKernel,
    epsilon: float,
    smoothed: SmoothedEos,
    delta: float,
    p_exp: float,
    q_tilde: float,
    weak: FlowField | None = None,
    far_field: str | None = None,
) -> ResidualBundle:
    """Space-time residuals of the mollified strong system.

    R1 = d_x(r_e v_e) - d_x (r v)_e
    R2 = d_t(r_e v_e) - d_t(r v)_e + d_x(r_e v_e^2) - d_x(r v^2)_e + d_x p(r_e) - d_x p(r)_e
    M  = (r_e^d - r_e)[d_t v_e + v_e d_x v_e + H''_s(r_e) d_x r_e] + (p'_s(r_e) - p'(r_e)) d_x r_e
    R3 = ((rho - r_e)(p'_s(r_e) - p'(r_e)) + p_s(r_e) - p(r_e)) d_x v_e

    M and R3 are set to zero outside W_eps = {r_e > 0}.  ``weak`` supplies rho
    in R3 (defaults to the strong density).
    """
    if strong.grid.geometry != "planar" or strong.expanding:
        raise NotImplementedError("mollified residuals are implemented for fixed planar grids")
    weak = strong if weak is None else weak
    _same_grid(weak, strong)
    params = smoothed.base
    g = strong.grid
    ff = far_field or strong.far_field
    frames, cells = _window(strong, kernel, epsilon, ff)
    dx, dt = g.dx, g.dt
    r = strong.rho
    v = strong.velocity()
    moll = lambda a, d=None: convolve(a, kernel, epsilon, dx, dt, ff, d)
    r_e, v_e = moll(r), moll(v)
    r_e = np.where(r_e > 0, r_e, 0.0)
    rx, rt = moll(r, "x"), moll(r, "t")
    vx, vt = moll(v, "x"), moll(v, "t")
    rv = r * v
    rvx, rvt = moll(rv, "x"), moll(rv, "t")
    rv2x = moll(rv * v, "x")
    px = moll(pressure(params, r), "x")

    r1 = rx * v_e + r_e * vx - rvx
    # same quantity through the commutator rearrangement I + II + III for G = f g
    I = rvx - v * rx - r * vx
    II = (v - v_e) * rx
    III = (r - r_e) * vx
    r1_alt = -(I + II + III)
    r2 = (rt * v_e + r_e * vt - rvt) + (rx * v_e**2 + 2 * r_e * v_e * vx - rv2x) + (pressure_derivative(params, r_e) * rx - px)

    mask = r_e > 0
    reg = regularize_density(r_e, delta, p_exp, q_tilde)
    d2H = np.where(mask, smoothed.d2H(np.where(mask, r_e, 1.0)), 0.0)
    m = (reg.r_eps_delta - r_e) * (vt + v_e * vx + d2H * rx) + (smoothed.dp(r_e) - pressure_derivative(params, r_e)) * rx
    m = np.where(mask, m, 0.0)
    rho = weak.rho
    r3 = ((rho - r_e) * (smoothed.dp(r_e) - pressure_derivative(params, r_e)) + smoothed.p(r_e) - pressure(params, r_e)) * vx
    r3 = np.where(mask, r3, 0.0)

    sl = (frames, cells)
    return ResidualBundle(
        r1=r1[sl], r1_alt=r1_alt[sl], r2=r2[sl], r3=r3[sl], m_delta=m[sl], r_eps=r_e[sl], v_eps=v_e[sl],
        rho_weak=rho[sl], d2H_r=d2H[sl], mask=mask[sl], epsilon=float(epsilon), sigma=float(smoothed.sigma),
        delta=float(delta), gamma=params.gamma, cell_measure=dx * dt,
        meta={"p_exp": p_exp, "q_tilde": q_tilde, "frames": (frames.start, frames.stop),
              "cells": (cells.start, cells.stop)},
    )


def _lp(v, p, w):
    v = np.abs(v)
    if v.size == 0 or np.max(v) == 0:
        return 0.0
    m = np.max(v)
    return float(m * (np.sum((v / m) ** p) * w) ** (1.0 / p))


NORM_NAMES = ("R2_over_rdelta_Ls", "M_over_rdelta_Ls", "rho_minus_r_H2_R1_L1", "R3_L1")


def residual_norm_report(bundle: ResidualBundle, regdens: RegularizedDensity | None = None, s: float | None = None) -> dict:
    """Norms of the four residual groups on W_eps; ``s`` defaults to 2 gamma/(gamma-1)."""
    s_def, s_dual = holder_pair(bundle.gamma)
    s = s_def if s is None else s
    if s < 2:
        raise ValueError(f"s must be at least 2, got {s}")
    if regdens is None:
        regdens = regularize_density(bundle.r_eps, bundle.delta, bundle.meta["p_exp"], bundle.meta["q_tilde"])
    if regdens.r_eps.shape != bundle.r_eps.shape:
        raise ValueError("regularised density and bundle have different shapes")
    w = bundle.cell_measure
    mask = bundle.mask
    inv = np.where(mask, 1.0 / np.where(mask, regdens.r_eps_delta, 1.0), 0.0)
    norms = {
        NORM_NAMES[0]: _lp((inv * bundle.r2)[mask], s, w),
        NORM_NAMES[1]: _lp((inv * bundle.m_delta)[mask], s, w),
        NORM_NAMES[2]: _lp(((bundle.rho_weak - bundle.r_eps) * bundle.d2H_r * bundle.r1)[mask], 1, w),
        NORM_NAMES[3]: _lp(bundle.r3[mask], 1, w),
    }
    return {"s": s, "s_dual": s_dual, "epsilon": bundle.epsilon, "norms": norms}


def residual_scaling(
    strong: FlowField,
    kernel: MollifierKernel,
    eps_sequence,
    params: EosParams,
    kappa_exp: float,
    nu: float,
    p_exp: float,
    q_tilde: float,
    weak: FlowField | None = None,
    far_field: str | None = None,
) -> dict:
    """Residual norms along an epsilon sweep with delta = eps^kappa_exp, sigma = eps^nu."""
    from .eos import build_smoothed

    eps = np.sort(np.asarray(eps_sequence, dtype=float))[::-1]
    rows = []
    table = {n: [] for n in NORM_NAMES}
    for e in eps:
        sm = build_smoothed(params, min(1.0, e**nu))
        b = mollified_residuals(strong, kernel, e, sm, e**kappa_exp, p_exp, q_tilde, weak, far_field)
        rep = residual_norm_report(b)
        for n in NORM_NAMES:
            table[n].append(rep["norms"][n])
    slopes = {}
    for n in NORM_NAMES:
        vals = np.array(table[n])
        slopes[n] = fit_slope(eps, vals) if np.any(vals > 0) else float("inf")
        for e, val in zip(eps, vals):
            rows.append((float(e), n, float(val), slopes[n]))
    s, s_dual = holder_pair(params.gamma)
    return {"s": s, "s_dual": s_dual, "kappa_exp": kappa_exp, "nu": nu, "rows": rows, "slopes": slopes}


# -- the relative energy inequality ------------------------------------------------

def _analytic(strong, t, x):
    if not (hasattr(strong, "state") and hasattr(strong, "derivatives")):
        raise ValueError("strong solution must supply analytic state(t, x) and derivatives(t, x)")
    r, v = strong.state(t, x)
    d = strong.derivatives(t, x)
    if d is None or len(d) != 4:
        raise ValueError("missing analytic derivatives (r_t, r_x, v_t, v_x)")
    return np.asarray(r, float), np.asarray(v, float), tuple(np.asarray(a, float) for a in d)


def proposition_residual(weak: FlowField, strong, smoothed: SmoothedEos, t1: float, t2: float) -> float:
    """RHS - LHS of the relative energy inequality on [t1, t2]; admissibility predicts >= 0.

    RHS = int int rho (v - u) v_t + rho u v_x (v - u) - p(rho) v_x
                   - (rho - r) H''_s(r) r_t - rho H''_s(r) u r_x
    LHS = int E_s(t2) - int E_s(t1)
    """
    if weak.grid.geometry != "planar" or weak.expanding:
        raise NotImplementedError("proposition_residual handles fixed planar grids")
    g = weak.grid
    k1, k2 = g.frame_index(t1), g.frame_index(t2)
    if k2 <= k1:
        raise ValueError("need t1 < t2")
    params = smoothed.base
    x = g.x
    u_all = weak.velocity()
    integrand = []
    for k in range(k1, k2 + 1):
        t = g.t[k]
        r, v, (rt, rx, vt, vx) = _analytic(strong, t, x)
        rho, u = weak.rho[k], u_all[k]
        d2 = smoothed.d2H(r)
        val = rho * (v - u) * vt + rho * u * vx * (v - u) - pressure(params, rho) * vx \
            - (rho - r) * d2 * rt - rho * d2 * u * rx
        integrand.append(np.sum(val) * g.dx)
    rhs = float(np.trapezoid(integrand, g.t[k1:k2 + 1]))

    def e_sigma(k):
        r, v, _ = _analytic(strong, g.t[k], x)
        return float(np.sum(energy_density(weak.rho[k], u_all[k], r, v, params, smoothed)) * g.dx)

    return rhs - (e_sigma(k2) - e_sigma(k1))


def gronwall_envelope(times, energies, lam, allowance: float = 0.0) -> dict:
    """Check E(t) <= (E(0) + allowance) exp(int_0^t Lambda) frame by frame."""
    times = np.asarray(times, float)
    energies = np.asarray(energies, float)
    lam = np.asarray(lam, float)
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (lam[1:] + lam[:-1]) * np.diff(times))])
    bound = (energies[0] + allowance) * np.exp(integral)
    margin = bound - energies
    return {"bound": bound, "margin": margin, "passed": bool(np.all(margin >= 0)), "min_margin": float(margin.min())}


def report_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1, default=float)
