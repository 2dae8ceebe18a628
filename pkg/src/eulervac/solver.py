"""Finite-volume solver for isentropic Euler with vacuum, and exact rarefaction solutions.

The scheme is first order: Rusanov or HLL fluxes with forward Euler (minmod
reconstruction switches to a two-stage SSP Runge-Kutta step).  It runs on a
planar line or on the radial reduction of a 2D flow, optionally on a mesh
that expands uniformly, x = a(t) xi with a(t) = 1 + e t.  On such a mesh the
fluxes are taken relative to the face velocity and the face weights use
a(t + dt/2), which reproduces the cell-volume change exactly, so constant
states at rest stay exactly at rest.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .core import FlowField, Grid
from .eos import EosParams, pressure, sound_speed

FLUXES = ("rusanov", "hll")
LIMITERS = ("none", "minmod")


@dataclass(frozen=True)
class SchemeConfig:
    flux: str = "rusanov"
    cfl: float = 0.45
    eps_vel: float | None = None  # defaults to dx^2
    limiter: str = "none"
    geometry: str = "planar"
    mesh_expansion: float = 0.0

    def __post_init__(self):
        if self.flux not in FLUXES:
            raise ValueError(f"flux must be one of {FLUXES}")
        if self.limiter not in LIMITERS:
            raise ValueError(f"limiter must be one of {LIMITERS}")
        if not 0 < self.cfl <= 0.9:
            raise ValueError(f"cfl must lie in (0, 0.9], got {self.cfl}")
        if self.eps_vel is not None and not self.eps_vel > 0:
            raise ValueError("eps_vel must be positive")
        if self.geometry not in ("planar", "radial"):
            raise ValueError("geometry must be planar or radial")
        if self.mesh_expansion < 0:
            raise ValueError("mesh_expansion must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class _Mesh:
    xi_c: np.ndarray
    xi_f: np.ndarray
    dxi: float
    radial: bool
    expansion: float

    def scale(self, t):
        return 1.0 + self.expansion * t

    def volumes(self, a):
        w = self.xi_c if self.radial else np.ones_like(self.xi_c)
        return (a**2 if self.radial else a) * w * self.dxi

    def face_weights(self, a_mid):
        return a_mid * self.xi_f if self.radial else np.ones_like(self.xi_f)


def _mesh(grid: Grid, config: SchemeConfig) -> _Mesh:
    if (config.geometry == "radial") != (grid.geometry == "radial"):
        raise ValueError("scheme geometry and grid geometry differ")
    return _Mesh(grid.x, grid.faces, grid.dx, grid.geometry == "radial", config.mesh_expansion)


def desingularized_velocity(rho, mom, eps_vel: float):
    return rho * mom / (rho * rho + eps_vel * eps_vel)


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _face_states(rho, u, limiter):
    """Left/right states at interior and boundary faces (transmissive ghosts)."""
    rg = np.concatenate([[rho[0]], rho, [rho[-1]]])
    ug = np.concatenate([[u[0]], u, [u[-1]]])
    if limiter == "minmod":
        sr = _minmod(rg[1:-1] - rg[:-2], rg[2:] - rg[1:-1])
        su = _minmod(ug[1:-1] - ug[:-2], ug[2:] - ug[1:-1])
        r_lo, r_hi = rho - 0.5 * sr, rho + 0.5 * sr
        u_lo, u_hi = u - 0.5 * su, u + 0.5 * su
        rl = np.concatenate([[r_lo[0]], r_hi])
        rr = np.concatenate([r_lo, [r_hi[-1]]])
        ul = np.concatenate([[u_lo[0]], u_hi])
        ur = np.concatenate([u_lo, [u_hi[-1]]])
    else:
        rl, rr = rg[:-1], rg[1:]
        ul, ur = ug[:-1], ug[1:]
    ul = np.where(rl > 0, ul, 0.0)
    ur = np.where(rr > 0, ur, 0.0)
    return rl, ul, rr, ur


def _flux(rl, ul, rr, ur, s, params: EosParams, kind: str):
    """Numerical flux of (rho, m) relative to a face moving with speed ``s``."""
    pl, pr = pressure(params, rl), pressure(params, rr)
    cl, cr = sound_speed(params, rl), sound_speed(params, rr)
    ml, mr = rl * ul, rr * ur
    fl = (ml - s * rl, ml * ul + pl - s * ml)
    fr = (mr - s * rr, mr * ur + pr - s * mr)
    vl, vr = ul - s, ur - s
    if kind == "rusanov":
        # vacuum states carry no wave speed
        a = np.maximum(np.where(rl > 0, np.abs(vl) + cl, 0.0), np.where(rr > 0, np.abs(vr) + cr, 0.0))
        f0 = 0.5 * (fl[0] + fr[0]) - 0.5 * a * (rr - rl)
        f1 = 0.5 * (fl[1] + fr[1]) - 0.5 * a * (mr - ml)
        return f0, f1, a
    g = params.gamma
    big = 2.0 / (g - 1.0)
    sl = np.where(rl > 0, vl - cl, vr - big * cr)
    sl = np.where((rl > 0) & (rr > 0), np.minimum(vl - cl, vr - cr), sl)
    sr = np.where(rr > 0, vr + cr, vl + big * cl)
    sr = np.where((rl > 0) & (rr > 0), np.maximum(vl + cl, vr + cr), sr)
    both_vac = (rl == 0) & (rr == 0)
    sl = np.where(both_vac, 0.0, sl)
    sr = np.where(both_vac, 0.0, sr)
    sl = np.minimum(sl, 0.0)
    sr = np.maximum(sr, 0.0)
    den = np.where(sr > sl, sr - sl, 1.0)
    out = []
    for fL, fR, uL, uR in ((fl[0], fr[0], rl, rr), (fl[1], fr[1], ml, mr)):
        hll = (sr * fL - sl * fR + sl * sr * (uR - uL)) / den
        out.append(np.where(sr > sl, hll, 0.5 * (fL + fR)))
    a = np.maximum(np.abs(sl), np.abs(sr))
    return out[0], out[1], a


def max_speed(rho, mom, mesh: _Mesh, a: float, params: EosParams, eps_vel: float) -> float:
    """Largest |u - s| + c over non-vacuum cells, in physical units."""
    u = desingularized_velocity(rho, mom, eps_vel)
    s = mesh.expansion * np.abs(mesh.xi_c)
    c = sound_speed(params, rho)
    sp = np.where(rho > 0, np.abs(u) + s + c, 0.0)
    return float(np.max(sp, initial=0.0))


def _rhs(rho, mom, mesh: _Mesh, t, dt, params, config, eps_vel):
    a_mid = mesh.scale(t + 0.5 * dt)
    u = desingularized_velocity(rho, mom, eps_vel)
    rl, ul, rr, ur = _face_states(rho, u, config.limiter)
    s = mesh.expansion * mesh.xi_f
    f0, f1, _ = _flux(rl, ul, rr, ur, s, params, config.flux)
    w = mesh.face_weights(a_mid)
    if mesh.radial:
        w = w.copy()
        w[0] = 0.0 if mesh.xi_f[0] == 0 else w[0]
    d0 = -(w[1:] * f0[1:] - w[:-1] * f0[:-1])
    d1 = -(w[1:] * f1[1:] - w[:-1] * f1[:-1])
    if mesh.radial:
        d1 = d1 + pressure(params, rho) * a_mid * mesh.dxi
    return d0, d1


def advance(rho, mom, config: SchemeConfig, params: EosParams, dt: float, grid: Grid, t: float = 0.0):
    """One conservative step of length ``dt`` from time ``t``; returns (rho, mom).

    Raises if ``dt`` violates the CFL bound or if a negative density appears.
    """
    mesh = _mesh(grid, config)
    eps_vel = config.eps_vel if config.eps_vel is not None else grid.dx**2
    rho = np.asarray(rho, dtype=float)
    mom = np.asarray(mom, dtype=float)
    a0 = mesh.scale(t)
    lam = max_speed(rho, mom, mesh, a0, params, eps_vel)
    limit = config.cfl * a0 * mesh.dxi
    if dt * lam > limit * (1 + 1e-9):
        raise ValueError(f"CFL violation: dt={dt:.6g} exceeds {limit / lam:.6g}")

    def euler(r, m, tt):
        aa, a1 = mesh.scale(tt), mesh.scale(tt + dt)
        v0, v1 = mesh.volumes(aa), mesh.volumes(a1)
        d0, d1 = _rhs(r, m, mesh, tt, dt, params, config, eps_vel)
        return (v0 * r + dt * d0) / v1, (v0 * m + dt * d1) / v1

    r1, m1 = euler(rho, mom, t)
    if config.limiter == "minmod":
        _check_positive(r1, t + dt)
        r1, m1 = _cleanup(r1, m1, eps_vel)
        r2, m2 = euler(r1, m1, t + dt)
        # SSP-RK2 average (valid on a moving mesh because both stages end at t + dt)
        if mesh.expansion:
            raise NotImplementedError("minmod reconstruction is available on fixed meshes only")
        r1, m1 = 0.5 * (rho + r2), 0.5 * (mom + m2)
    _check_positive(r1, t + dt)
    return _cleanup(r1, m1, eps_vel)


def _check_positive(rho, t):
    if np.any(rho < 0):
        i = int(np.argmin(rho))
        raise FloatingPointError(f"negative density {rho[i]:.3e} in cell {i} at t={t:.6g}")


def _cleanup(rho, mom, eps_vel):
    # near vacuum (rho^2 < eps_vel) momentum is reset to rho times the desingularised
    # velocity; elsewhere the correction would be O(eps_vel^2 / rho^2) and is skipped
    u = desingularized_velocity(rho, mom, eps_vel)
    mom = np.where(rho * rho < eps_vel, rho * u, mom)
    return rho, np.where(rho > 0, mom, 0.0)


def solve(grid: Grid, rho0, u0, config: SchemeConfig, params: EosParams, far_field: str = "zero",
          closure=None, max_steps: int = 10_000_000) -> FlowField:
    """Evolve from ``grid.t_start`` and record every output frame of ``grid``.

    ``rho0`` and ``u0`` are arrays at cell centres or callables of the cell
    centres.  ``closure(t, x)`` optionally supplies the velocity on vacuum
    cells of the output (for exterior checks).
    """
    x = grid.x
    rho = np.asarray(rho0(x) if callable(rho0) else rho0, dtype=float).copy()
    u = np.asarray(u0(x) if callable(u0) else u0, dtype=float)
    if rho.shape != x.shape:
        raise ValueError("initial density has the wrong shape")
    if np.any(rho < 0):
        i = int(np.flatnonzero(rho < 0)[0])
        raise ValueError(f"negative initial density in cell {i}")
    mom = np.where(rho > 0, rho * u, 0.0)
    mesh = _mesh(grid, config)
    eps_vel = config.eps_vel if config.eps_vel is not None else grid.dx**2
    frames_r = [rho.copy()]
    frames_m = [mom.copy()]
    t = grid.t_start
    steps = 0
    for t_next in grid.t[1:]:
        while t < t_next - 1e-14 * max(1.0, abs(t_next)):
            a0 = mesh.scale(t)
            lam = max_speed(rho, mom, mesh, a0, params, eps_vel)
            dt = config.cfl * a0 * mesh.dxi / lam if lam > 0 else t_next - t
            dt = min(dt, t_next - t)
            rho, mom = advance(rho, mom, config, params, dt, grid, t)
            t = t_next if t_next - (t + dt) <= 1e-14 * max(1.0, abs(t_next)) else t + dt
            steps += 1
            if steps > max_steps:
                raise RuntimeError("step limit exceeded")
        frames_r.append(rho.copy())
        frames_m.append(mom.copy())
    R, M = np.array(frames_r), np.array(frames_m)
    scale = np.array([mesh.scale(t) for t in grid.t]) if config.mesh_expansion else None
    vc = None
    if closure is not None:
        vc = np.zeros_like(R)
        for k, tk in enumerate(grid.t):
            pos = x if scale is None else scale[k] * x
            vc[k] = np.where(R[k] == 0, closure(tk, pos), 0.0)
    meta = {"scheme": config.to_dict(), "eos": params.to_dict(), "steps": steps}
    return FlowField(grid, R, M, role="weak", far_field=far_field, vel_closure=vc, mesh_scale=scale, meta=meta)


def discrete_energy(field: FlowField, params: EosParams) -> np.ndarray:
    """Total energy sum (1/2 rho u^2 + H(rho)) |cell| per frame."""
    from .eos import pressure_potential

    u = field.velocity()
    return np.array([
        np.sum((0.5 * field.rho[k] * u[k] ** 2 + pressure_potential(params, field.rho[k])) * field.cell_volumes(k))
        for k in range(field.shape[0])
    ])


# -- exact solutions ------------------------------------------------------------------

@dataclass(frozen=True)
class RiemannSetup:
    rho_l: float
    u_l: float
    rho_r: float
    u_r: float
    params: EosParams
    x0: float = 0.0

    def __post_init__(self):
        if self.rho_l < 0 or self.rho_r < 0:
            raise ValueError("densities must be nonnegative")
        if self.rho_l == 0 and self.rho_r == 0:
            raise ValueError("both states are vacuum")


class ConstantState:
    """Strong solution (r, v) = const with analytic derivatives."""

    def __init__(self, rho: float, u: float):
        self.rho, self.u = float(rho), float(u)

    def state(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.full_like(x, self.rho), np.full_like(x, self.u)

    def derivatives(self, t, x):
        z = np.zeros_like(np.asarray(x, dtype=float))
        return z, z.copy(), z.copy(), z.copy()


class RarefactionSolution:
    """Self-similar solution of a Riemann problem resolved by rarefactions only.

    Vacuum regions (inside the initial data or opened between the fans)
    carry the closure velocity (x - x0)/t, which solves the pressureless
    transport equation there.
    """

    def __init__(self, setup: RiemannSetup):
        p = setup.params
        self.setup = setup
        g = p.gamma
        self._k = 2.0 / (g - 1.0)
        self._a = (g - 1.0) / (g + 1.0)
        self.c_l = float(sound_speed(p, setup.rho_l))
        self.c_r = float(sound_speed(p, setup.rho_r))
        self.I_l = setup.u_l + self._k * self.c_l
        self.I_r = setup.u_r - self._k * self.c_r
        vac_l, vac_r = setup.rho_l == 0, setup.rho_r == 0
        if vac_l:
            self.vacuum = True
            self.u_star = self.c_star = np.nan
        elif vac_r:
            self.vacuum = True
            self.u_star = self.c_star = np.nan
        else:
            u_s = 0.5 * (self.I_l + self.I_r)
            c_s = 0.25 * (g - 1.0) * (self.I_l - self.I_r)
            if c_s > self.c_l * (1 + 1e-12) or c_s > self.c_r * (1 + 1e-12):
                raise ValueError("not a rarefaction connection: the data need a shock")
            self.vacuum = c_s <= 0
            self.u_star, self.c_star = (np.nan, 0.0) if self.vacuum else (u_s, c_s)
        self.vac_l, self.vac_r = vac_l, vac_r

    def _rho_of_c(self, c):
        p = self.setup.params
        c = np.maximum(c, 0.0)
        return (c * c / (p.kappa * p.gamma)) ** (1.0 / (p.gamma - 1.0))

    def wave_speeds(self) -> dict:
        s = self.setup
        out = {}
        if not self.vac_l:
            out["head_1"] = s.u_l - self.c_l
            out["tail_1"] = self.I_l if self.vacuum else self.u_star - self.c_star
        if not self.vac_r:
            out["tail_2"] = self.I_r if self.vacuum else self.u_star + self.c_star
            out["head_2"] = s.u_r + self.c_r
        return out

    def _pieces(self, xi):
        """Region labels: 0 left, 1 fan1, 2 middle/vacuum, 3 fan2, 4 right."""
        w = self.wave_speeds()
        lab = np.full(xi.shape, 2)
        if not self.vac_l:
            lab = np.where(xi < w["tail_1"], 1, lab)
            lab = np.where(xi < w["head_1"], 0, lab)
        if not self.vac_r:
            lab = np.where(xi > w["tail_2"], 3, lab)
            lab = np.where(xi > w["head_2"], 4, lab)
        return lab

    def state(self, t, x):
        s = self.setup
        x = np.asarray(x, dtype=float)
        if t <= 0:
            left = x < s.x0
            rho = np.where(left, s.rho_l, s.rho_r)
            u = np.where(left, s.u_l, s.u_r)
            return rho, u
        xi = (x - s.x0) / t
        lab = self._pieces(xi)
        c1 = self._a * (self.I_l - xi)
        c2 = self._a * (xi - self.I_r)
        c = np.select([lab == 0, lab == 1, lab == 2, lab == 3, lab == 4],
                      [self.c_l, c1, self.c_star if not self.vacuum else 0.0, c2, self.c_r])
        u = np.select([lab == 0, lab == 1, lab == 2, lab == 3, lab == 4],
                      [s.u_l, xi + c1, self.u_star if not self.vacuum else xi, xi - c2, s.u_r])
        rho = self._rho_of_c(c)
        rho = np.where(lab == 0, s.rho_l, np.where(lab == 4, s.rho_r, rho))
        return rho, u

    def derivatives(self, t, x):
        """(r_t, r_x, v_t, v_x); one-sided values at the fan edges."""
        s = self.setup
        p = s.params
        x = np.asarray(x, dtype=float)
        if t <= 0:
            raise ValueError("derivatives are defined for t > 0")
        xi = (x - s.x0) / t
        lab = self._pieces(xi)
        rho, _ = self.state(t, x)
        c = np.sqrt(p.kappa * p.gamma) * rho ** ((p.gamma - 1) / 2)
        kfac = 2.0 / (p.gamma - 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            drho_dc = np.where(c > 0, kfac * rho / c, 0.0)
        dc = np.select([lab == 1, lab == 3], [-self._a, self._a], 0.0)
        du = np.select([lab == 1, lab == 3, lab == 2], [1 - self._a, 1 - self._a, 1.0 if self.vacuum else 0.0], 0.0)
        drho = drho_dc * dc
        rx, vx = drho / t, du / t
        rt, vt = -xi * rx, -xi * vx
        return rt, rx, vt, vx

    def closure(self, t, x):
        return self.state(t, x)[1]

    def sample(self, grid: Grid, role: str = "strong", far_field: str = "constant") -> FlowField:
        R = np.empty((grid.n_steps, grid.n_cells))
        U = np.empty_like(R)
        for k, t in enumerate(grid.t):
            R[k], U[k] = self.state(t, grid.x)
        M = np.where(R > 0, R * U, 0.0)
        vc = np.where(R == 0, U, 0.0)
        return FlowField(grid, R, M, role=role, far_field=far_field, vel_closure=vc,
                         meta={"exact": "rarefaction", "setup": [self.setup.rho_l, self.setup.u_l,
                                                                  self.setup.rho_r, self.setup.u_r]})


class SimpleWave:
    """Smooth periodic simple wave for gamma = 3.

    With gamma = 3 the Riemann invariants w = u + c and u - c are transported
    by Burgers' equation, so w(t, x) = w0(x - t w) with the other invariant
    constant.  Valid before the breaking time 1 / (2 pi amp).
    """

    def __init__(self, params: EosParams, base: float = 2.0, amp: float = 0.1, minus: float = 0.0):
        if params.gamma != 3:
            raise ValueError("the simple wave is exact for gamma = 3 only")
        if not base - amp > minus:
            raise ValueError("density must stay positive: need base - amp > minus")
        self.params, self.base, self.amp, self.minus = params, float(base), float(amp), float(minus)
        self.t_break = 1.0 / (2 * np.pi * amp) if amp > 0 else np.inf

    def _w(self, t, x):
        x = np.asarray(x, dtype=float)
        if t >= self.t_break:
            raise ValueError("past the breaking time")
        w = self.base + self.amp * np.sin(2 * np.pi * x)
        for _ in range(100):
            xi = x - t * w
            f = w - self.base - self.amp * np.sin(2 * np.pi * xi)
            df = 1 + 2 * np.pi * self.amp * t * np.cos(2 * np.pi * xi)
            step = f / df
            w = w - step
            if np.max(np.abs(step)) < 1e-15:
                break
        d0 = 2 * np.pi * self.amp * np.cos(2 * np.pi * (x - t * w))
        return w, d0

    def state(self, t, x):
        w, _ = self._w(t, x)
        u = 0.5 * (w + self.minus)
        c = 0.5 * (w - self.minus)
        return c / np.sqrt(3 * self.params.kappa), u

    def derivatives(self, t, x):
        w, d0 = self._w(t, x)
        wx = d0 / (1 + t * d0)
        wt = -w * wx
        k = 0.5 / np.sqrt(3 * self.params.kappa)
        return k * wt, k * wx, 0.5 * wt, 0.5 * wx

    def sample(self, grid: Grid, role: str = "strong") -> FlowField:
        R = np.empty((grid.n_steps, grid.n_cells))
        U = np.empty_like(R)
        for k, t in enumerate(grid.t):
            R[k], U[k] = self.state(t, grid.x)
        return FlowField(grid, R, R * U, role=role, far_field="periodic", meta={"exact": "simple_wave"})


def exact_rarefaction(setup: RiemannSetup, t: float, x):
    """(rho, u) of the rarefaction solution at time t and positions x."""
    return RarefactionSolution(setup).state(t, x)


def pde_residual(sol, t: float, x, h: float = 1e-6):
    """Finite-difference residuals of the mass and momentum equations (non-conservative form)."""
    p = sol.setup.params if hasattr(sol, "setup") else sol.params
    r0, u0 = sol.state(t, x)
    rtp, utp = sol.state(t + h, x)
    rtm, utm = sol.state(t - h, x)
    rxp, uxp = sol.state(t, x + h)
    rxm, uxm = sol.state(t, x - h)
    rt, ut = (rtp - rtm) / (2 * h), (utp - utm) / (2 * h)
    rx, ux = (rxp - rxm) / (2 * h), (uxp - uxm) / (2 * h)
    mass = rt + u0 * rx + r0 * ux
    c2 = p.kappa * p.gamma * r0 ** (p.gamma - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        mom = np.where(r0 > 0, ut + u0 * ux + c2 / np.where(r0 > 0, r0, 1) * rx, 0.0)
    return mass, mom


def manifest(grid: Grid, config: SchemeConfig, params: EosParams, extra: dict | None = None) -> str:
    d = {"grid": grid.to_dict(), "scheme": config.to_dict(), "eos": params.to_dict()}
    if extra:
        d.update(extra)
    return json.dumps(d, sort_keys=True, indent=1)
