"""Compactly supported radial data whose vacuum boundary moves as (1 + t) R.

Initial data: rho0 = A (R - r)^N for R/2 <= r <= R, an even quartic core
below R/2 matched to second order, and u0 = r.  The flow is computed with
the radial finite-volume scheme on a mesh that expands like 1 + t, so the
exact support is always the cells with xi < R.

The checks are trend checks on a discrete solution:

* the tracked boundary radius against (1 + t) R,
* growth of J_eps(t) = int_{B((1+t)R)} (eps + rho)^-theta against the rate
  (1 + theta) max |div u|, with the two boundary fluxes that cancel,
* the integral of rho_{eps,delta}^-theta over W_eps and its Jensen bound.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .core import FlowField, Grid
from .eos import EosParams
from .mollify import MollifierKernel
from .rates import fit_slope
from .solver import SchemeConfig, solve


@dataclass(frozen=True)
class Example4Config:
    R: float = 1.0
    N_profile: float = 4.0
    theta: float = 0.125
    s_reg: float = 3.0  # Sobolev index of c0, recorded only
    T: float = 1.0
    n_cells: int = 1024
    n_frames: int = 41
    r_max_factor: float = 2.0
    amplitude: float = 1.0
    gamma: float = 2.0
    kappa: float = 1.0
    eps_seq: tuple = (0.2, 0.1, 0.05, 0.025)
    delta_seq: tuple = (1e-2, 1e-3, 1e-4, 1e-5)

    def __post_init__(self):
        if not self.N_profile * self.theta < 1:
            raise ValueError(f"need N_profile * theta < 1, got {self.N_profile * self.theta:g}")
        if self.R <= 0 or self.T <= 0 or self.amplitude <= 0:
            raise ValueError("R, T and amplitude must be positive")
        if self.r_max_factor <= 1:
            raise ValueError("r_max_factor must exceed 1 so the grid contains vacuum")
        if self.N_profile * (self.gamma - 1) <= 1:
            # the pressure force must vanish at the edge for the boundary to move with u0
            raise ValueError("need N_profile * (gamma - 1) > 1")

    @property
    def params(self) -> EosParams:
        return EosParams(self.kappa, self.gamma)

    def grid(self, n_cells: int | None = None) -> Grid:
        return Grid(0.0, self.r_max_factor * self.R, n_cells or self.n_cells, 0.0, self.T, self.n_frames,
                    dim=2, geometry="radial")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["eps_seq"], d["delta_seq"] = list(self.eps_seq), list(self.delta_seq)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Example4Config":
        d = dict(d)
        for k in ("eps_seq", "delta_seq"):
            if k in d:
                d[k] = tuple(float(v) for v in d[k])
        return cls(**d)


def _core_coeffs(cfg: Example4Config):
    """c0 + c2 r^2 + c4 r^4 matching A (R - r)^N to second order at R/2."""
    A, R, N = cfg.amplitude, cfg.R, cfg.N_profile
    h = R / 2
    f = A * h**N
    f1 = -N * A * h ** (N - 1)
    f2 = N * (N - 1) * A * h ** (N - 2)
    M = np.array([[1, h**2, h**4], [0, 2 * h, 4 * h**3], [0, 2, 12 * h**2]], dtype=float)
    return np.linalg.solve(M, [f, f1, f2])


def initial_density(cfg: Example4Config, r):
    r = np.abs(np.asarray(r, dtype=float))
    c0, c2, c4 = _core_coeffs(cfg)
    core = c0 + c2 * r**2 + c4 * r**4
    edge = cfg.amplitude * np.maximum(cfg.R - r, 0.0) ** cfg.N_profile
    return np.where(r < cfg.R / 2, core, edge)


def initial_velocity(cfg: Example4Config, r):
    return np.asarray(r, dtype=float).copy()


def exterior_velocity(t, x):
    """Exterior transport solution u = x / (1 + t)."""
    return np.asarray(x, dtype=float) / (1.0 + t)


def build_example(cfg: Example4Config, n_cells: int | None = None) -> FlowField:
    """Single-frame radial field of the initial data; c0 = rho0^((gamma-1)/2) in meta."""
    g = cfg.grid(n_cells)
    g0 = Grid(g.x_min, g.x_max, g.n_cells, 0.0, g.dx, 2, dim=2, geometry="radial")
    rho = initial_density(cfg, g.x)
    if np.any(rho[g.x < cfg.R] <= 0):
        raise ValueError("the core polynomial is not positive; change N_profile or amplitude")
    u = initial_velocity(cfg, g.x)
    mom = np.where(rho > 0, rho * u, 0.0)
    closure = np.where(rho == 0, u, 0.0)
    c0 = rho ** ((cfg.gamma - 1) / 2)
    R2 = np.vstack([rho, rho])
    return FlowField(g0, R2, np.vstack([mom, mom]), role="strong", far_field="zero",
                     vel_closure=np.vstack([closure, closure]), meta={"c0": c0.tolist(), "config": cfg.to_dict()})


def inverse_power_closed_form(cfg: Example4Config, theta: float | None = None) -> float:
    """int over R/2 < r < R of (A (R - r)^N)^-theta 2 pi r dr in closed form."""
    th = cfg.theta if theta is None else theta
    a = cfg.N_profile * th
    if a >= 1:
        return float("inf")
    h = cfg.R / 2
    return 2 * math.pi * cfg.amplitude ** (-th) * (cfg.R * h ** (1 - a) / (1 - a) - h ** (2 - a) / (2 - a))


def inverse_power_quadrature(cfg: Example4Config, theta: float | None = None) -> float:
    """Adaptive quadrature of rho0^-theta 2 pi r over the same annulus (independent of the closed form)."""
    th = cfg.theta if theta is None else theta
    f = lambda r: 2 * math.pi * r * float(initial_density(cfg, r)) ** (-th)
    val, _ = integrate.quad(f, cfg.R / 2, cfg.R, limit=400, epsrel=1e-10)
    return float(val)


def run_example(cfg: Example4Config, n_cells: int | None = None, flux: str = "rusanov") -> FlowField:
    g = cfg.grid(n_cells)
    # the velocity floor must sit below the edge densities ~ dr^N, or the edge freezes
    scheme = SchemeConfig(flux=flux, geometry="radial", mesh_expansion=1.0, eps_vel=g.dx ** (2 * cfg.N_profile))
    field = solve(g, lambda r: initial_density(cfg, r), lambda r: initial_velocity(cfg, r), scheme, cfg.params,
                  closure=exterior_velocity)
    field.meta["config"] = cfg.to_dict()
    return field


# -- boundary ----------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryTrack:
    t: tuple
    radius: tuple
    exact: tuple
    error: tuple
    cell_width: tuple  # physical radial cell width per frame

    @property
    def max_error_cells(self) -> float:
        return float(max(e / w for e, w in zip(self.error, self.cell_width)))

    def passed(self, cells: float = 2.0) -> bool:
        return all(e <= cells * w for e, w in zip(self.error, self.cell_width))


def track_boundary(run: FlowField, R: float, N_profile: float) -> BoundaryTrack:
    """Outer face of the outermost cell with rho above the support threshold.

    The threshold is dr0^N scaled by the decay of the peak density, i.e. one
    boundary cell's worth of the profile's degeneracy.
    """
    g = run.grid
    nt = run.shape[0]
    scale = run.mesh_scale if run.expanding else np.ones(nt)
    peak0 = run.rho[0].max()
    radius, width = [], []
    for k in range(nt):
        thr = g.dx**N_profile * run.rho[k].max() / peak0
        idx = np.flatnonzero(run.rho[k] > thr)
        r = 0.0 if idx.size == 0 else g.faces[idx[-1] + 1] * scale[k]
        radius.append(float(r))
        width.append(float(g.dx * scale[k]))
    exact = [(1 + t) * R for t in g.t]
    err = [abs(a - b) for a, b in zip(radius, exact)]
    return BoundaryTrack(tuple(map(float, g.t)), tuple(radius), tuple(exact), tuple(err), tuple(width))


# -- Gronwall monitor ------------------------------------------------------------------

def _support_cells(run: FlowField, R: float):
    g = run.grid
    if g.geometry != "radial":
        raise NotImplementedError("the monitor expects a radial run")
    # on the expanding mesh xi < R is B((1+t)R); a fixed mesh keeps B(R)
    return g.x < R


def divergence(run: FlowField, k: int) -> np.ndarray:
    """div u = u_r + u / r on the cell centres (2D radial)."""
    r = run.positions(k)
    u = run.velocity()[k]
    return np.gradient(u, r) + u / r


@dataclass(frozen=True)
class GronwallReport:
    eps: float
    theta: float
    t: tuple
    J: tuple
    rate: float  # C_hat
    log_growth: tuple
    allowed: tuple
    boundary_transport: tuple
    boundary_flux: tuple
    passed: bool

    def cancellation_defect(self) -> float:
        a, b = np.array(self.boundary_transport), np.array(self.boundary_flux)
        return float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))


def gronwall_monitor(run: FlowField, theta: float, eps_floor: float, R: float = 1.0, tol: float = 0.1) -> GronwallReport:
    """J_eps(t) on B((1+t)R) and the check log J(t) - log J(0) <= (C_hat + tol) t.

    C_hat = (1 + theta) max_t max_support |div u|.  The two boundary terms of
    d/dt J are eps^-theta |dOmega| V (transport of the domain, V the speed of
    the tracked radius) and eps^-theta |dOmega| u_b (flux through it, u_b the
    velocity extrapolated to r = (1+t)R); they cancel in the continuum.
    """
    if eps_floor <= 0:
        raise ValueError("eps_floor must be positive")
    g = run.grid
    inside = _support_cells(run, R)
    nt = run.shape[0]
    J = np.empty(nt)
    divmax = 0.0
    for k in range(nt):
        vol = run.cell_volumes(k)
        J[k] = np.sum(((eps_floor + run.rho[k]) ** (-theta) * vol)[inside])
        d = divergence(run, k)[inside & (run.rho[k] > 0)]
        if d.size:
            divmax = max(divmax, float(np.max(np.abs(d))))
    rate = (1 + theta) * divmax
    grow = np.log(J) - np.log(J[0])
    allowed = (rate + tol) * g.t
    # boundary terms
    scale = run.mesh_scale if run.expanding else np.ones(nt)
    rb = R * scale
    V = np.gradient(rb, g.t)
    u = run.velocity()
    last = np.flatnonzero(inside)[-3:]
    ub = np.array([np.polyval(np.polyfit(g.x[last], u[k, last], 1), R) for k in range(nt)])
    pref = eps_floor ** (-theta) * 2 * np.pi * rb
    return GronwallReport(float(eps_floor), float(theta), tuple(map(float, g.t)), tuple(map(float, J)), float(rate),
                          tuple(map(float, grow)), tuple(map(float, allowed)), tuple(map(float, pref * V)),
                          tuple(map(float, pref * ub)), bool(np.all(grow <= allowed + 1e-12)))


# -- uniform integrability ------------------------------------------------------------

def _kernel_samples(kernel: MollifierKernel, n_s: int = 6, n_y: int = 12):
    """Midpoint samples (s, y1, y2, weight) of the kernel support [0,1] x B(0,1)."""
    if kernel.profile != "onesided" or kernel.space_dim != 2:
        raise ValueError("expected the one-sided kernel in two space dimensions")
    s = (np.arange(n_s) + 0.5) / n_s
    y = -1 + (np.arange(n_y) + 0.5) * 2 / n_y
    S, Y1, Y2 = np.meshgrid(s, y, y, indexing="ij")
    inside = Y1**2 + Y2**2 < 1
    w = np.full(S.shape, (1.0 / n_s) * (2.0 / n_y) ** 2)
    S, Y1, Y2, w = S[inside], Y1[inside], Y2[inside], w[inside]
    eta = kernel(S, np.hypot(Y1, Y2))
    return S, Y1, Y2, w, eta


def _physical_density(run: FlowField):
    """Interpolator rho(t, r) on the lab radius, zero outside the grid."""
    g = run.grid
    scale = run.mesh_scale if run.expanding else np.ones(run.shape[0])

    def at(t, r):
        t = np.clip(t, g.t_start, g.t_end)
        k = np.clip(np.searchsorted(g.t, t, side="right") - 1, 0, len(g.t) - 2)
        lam = (t - g.t[k]) / g.dt
        out = 0.0
        for kk, wk in ((k, 1 - lam), (k + 1, lam)):
            xi = r / scale[kk]
            vals = np.interp(xi, g.x, run.rho[kk], left=run.rho[kk][0], right=0.0)
            out = out + wk * vals
        return out

    return at


@dataclass(frozen=True)
class IntegrabilityCheck:
    theta: float
    table: tuple  # ((eps, delta, lhs, jensen_rhs), ...)
    jensen_constant: float
    jensen_ok: bool
    delta_monotone: bool
    support_integrals: tuple  # ((delta, int_Omega (rho + delta)^-theta), ...)
    delta_slope: float  # log-log slope of successive support-integral increments
    delta_ok: bool
    uniform_ratio: float
    uniform_slope: float
    uniform_ok: bool

    @property
    def passed(self) -> bool:
        return self.jensen_ok and self.delta_monotone and self.delta_ok and self.uniform_ok

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)


def check_uniform_integrability(run: FlowField, kernel: MollifierKernel, theta: float, delta_seq, eps_seq,
                                R: float = 1.0, factor: float = 4.0, slope_floor: float = -0.25,
                                delta_slope_floor: float = 0.0, frame_stride: int = 4, n_s: int = 6,
                                n_y: int = 12) -> IntegrabilityCheck:
    """Integral of rho_{eps,delta}^-theta over W_eps = {(t, x): |x| < (1+t)R + eps}.

    rho_{eps,delta}(z) = sum_j w_j (eta_j + delta)(rho(z - eps w_j) + delta)
    over midpoint samples w_j of the kernel support S.  With the same
    samples, Jensen's inequality gives exactly

        int_W rho_{eps,delta}^-theta <= |S|^(-theta-1) [sum_j w_j (eta_j + delta)^-theta] int_cone (rho + delta)^-theta

    where the cone is W_eps fattened by eps in space and back in time.

    Verdicts:
    * the Jensen bound for every (eps, delta);
    * the left side grows monotonically as delta decreases;
    * dominated convergence: the increments of the support part of the cone
      integral, int_Omega (rho + delta)^-theta, between successive deltas
      scale like delta^(1/N - theta) near a degenerate edge; their log-log
      slope must exceed ``delta_slope_floor`` (shrinking increments);
    * max <= factor * min across eps at the smallest delta, with a log-log
      slope in eps of at least ``slope_floor``.

    The vacuum part of W_eps contributes about delta^-theta times a set of
    measure O(eps), so the left side itself keeps growing slowly as delta
    decreases; the dominated-convergence verdict therefore uses the support
    integral.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    if not math.isfinite(kernel.inverse_power_integral(theta)):
        raise ValueError("kernel has a divergent inverse-power integral for this theta")
    g = run.grid
    eps_seq = sorted((float(e) for e in eps_seq), reverse=True)
    delta_seq = sorted((float(d) for d in delta_seq), reverse=True)
    S, Y1, Y2, w, eta = _kernel_samples(kernel, n_s, n_y)
    S_meas = float(w.sum())
    rho_at = _physical_density(run)
    scale = run.mesh_scale if run.expanding else np.ones(run.shape[0])
    frames = np.arange(0, run.shape[0], frame_stride)
    frames = frames[g.t[frames] >= max(eps_seq) - 1e-12]
    if frames.size < 2:
        raise ValueError("too few frames after the time shift")
    dtw = g.dt * frame_stride
    table = []
    jensen_ok = True
    monotone = True
    lhs_small = []
    supp = []
    for d in delta_seq:
        acc = 0.0
        for k in frames:
            inside = g.x < R if run.expanding else g.x < (1 + g.t[k]) * R
            acc += np.sum(((run.rho[k] + d) ** (-theta) * run.cell_volumes(k))[inside]) * dtw
        supp.append(acc)
    if len(delta_seq) < 3:
        raise ValueError("need at least three deltas")
    d_slope = fit_slope(np.array(delta_seq[1:]), np.abs(np.diff(supp)))
    for e in eps_seq:
        # evaluation points: frames x radii covering W_eps
        lhs = {d: 0.0 for d in delta_seq}
        cone = {d: 0.0 for d in delta_seq}
        for k in frames:
            t = g.t[k]
            rmax = (1 + t) * R + e
            dr = g.dx * scale[k]
            nr = int(np.ceil(rmax / dr))
            r = (np.arange(nr) + 0.5) * rmax / nr
            area = 2 * np.pi * r * (rmax / nr)
            samples = np.array([rho_at(t - e * sj, np.hypot(r - e * y1, e * y2)) for sj, y1, y2 in zip(S, Y1, Y2)])
            # cone region for the Jensen bound
            rc_max = rmax + e
            rc = (np.arange(nr + 2) + 0.5) * rc_max / (nr + 2)
            ac = 2 * np.pi * rc * (rc_max / (nr + 2))
            cone_t = np.linspace(t - e, t, 5)
            rho_c = np.array([rho_at(tc, rc) for tc in cone_t])
            for d in delta_seq:
                rde = np.sum(w[:, None] * (eta[:, None] + d) * (samples + d), axis=0)
                lhs[d] += np.sum(rde ** (-theta) * area) * dtw
                # sup over time shifts of the spatial cone integral, per frame
                cone[d] += np.max(np.sum((rho_c + d) ** (-theta) * ac, axis=1)) * dtw
        prev = None
        for d in delta_seq:
            i_eta = float(np.sum(w * (eta + d) ** (-theta)))
            rhs = S_meas ** (-theta - 1) * i_eta * cone[d]
            table.append((e, d, float(lhs[d]), float(rhs)))
            jensen_ok &= lhs[d] <= rhs * (1 + 1e-9)
            if prev is not None:
                monotone &= lhs[d] >= prev * (1 - 1e-9)
            prev = lhs[d]
        lhs_small.append(lhs[delta_seq[-1]])
    vals = np.array(lhs_small)
    ratio = float(vals.max() / vals.min())
    slope = fit_slope(np.array(eps_seq), vals)
    uniform = ratio <= factor and slope >= slope_floor
    return IntegrabilityCheck(float(theta), tuple(table), S_meas ** (-theta - 1), bool(jensen_ok), bool(monotone),
                              tuple(zip(delta_seq, map(float, supp))), float(d_slope),
                              bool(d_slope > delta_slope_floor), ratio, float(slope), bool(uniform))


def jensen_constant_field(kernel: MollifierKernel, theta: float, delta: float, n_s: int = 6, n_y: int = 12) -> dict:
    """Both sides of the Jensen bound for rho = 1 at a single point, in closed form.

    rho_{eps,delta} = (1 + delta) sum w (eta + delta), so the left side is
    ((1+delta) sum w (eta+delta))^-theta and the right side (per unit cone
    measure) |S|^(-theta-1) sum w (eta+delta)^-theta (1+delta)^-theta.
    """
    _, _, _, w, eta = _kernel_samples(kernel, n_s, n_y)
    S_meas = float(w.sum())
    lhs = float(((1 + delta) * np.sum(w * (eta + delta))) ** (-theta))
    rhs = float(S_meas ** (-theta - 1) * np.sum(w * (eta + delta) ** (-theta)) * (1 + delta) ** (-theta))
    return {"lhs": lhs, "rhs": rhs, "ratio": lhs / rhs}
