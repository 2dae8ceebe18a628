"""Checks of a discrete flow field against the weak-solution and strong-solution conditions.

Each check is an independent pass over a FlowField:

* the weak form of mass and momentum against polynomial bumps,
* the total-energy inequality E(tau) <= E(0),
* a lower bound for the one-sided Lipschitz constant Lambda(t),
* the transport equation u_t + u u_x = 0 for the velocity on vacuum cells,
* boundedness in epsilon of the integral of rho_eps^-theta over W_eps.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import FlowField
from .eos import EosParams, pressure, pressure_potential
from .mollify import MollifierKernel, convolve
from .rates import fit_slope


# -- test functions ----------------------------------------------------------------

def _bump(s):
    s = np.asarray(s, dtype=float)
    return np.where(np.abs(s) < 1, (1 - s * s) ** 3, 0.0)


def _bump_antideriv(s):
    s = np.clip(np.asarray(s, dtype=float), -1.0, 1.0)
    return s - s**3 + 0.6 * s**5 - s**7 / 7


@dataclass(frozen=True)
class BumpTest:
    """phi(t, x) = amplitude * (1 + rate t) * (1 - ((x - center)/width)^2)^3_+."""

    center: float
    width: float
    amplitude: float = 1.0
    rate: float = 0.5

    def cell_integrals(self, faces: np.ndarray, t: float):
        """Exact cell integrals of (phi, phi_x, phi_t) for the given cell faces."""
        s = (faces - self.center) / self.width
        B = _bump_antideriv(s)
        b = _bump(s)
        a = self.amplitude
        phi = a * (1 + self.rate * t) * self.width * np.diff(B)
        phi_x = a * (1 + self.rate * t) * np.diff(b)
        phi_t = a * self.rate * self.width * np.diff(B)
        return phi, phi_x, phi_t

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.width, self.center + self.width


@dataclass(frozen=True)
class SumTest:
    """Linear combination of tests."""

    tests: tuple
    coefs: tuple

    def cell_integrals(self, faces, t):
        parts = [tt.cell_integrals(faces, t) for tt in self.tests]
        return tuple(sum(c * p[i] for c, p in zip(self.coefs, parts)) for i in range(3))

    @property
    def support(self):
        sup = [tt.support for tt in self.tests]
        return min(a for a, _ in sup), max(b for _, b in sup)


def default_tests(field: FlowField, n: int = 5) -> list[BumpTest]:
    g = field.grid
    L = g.x_max - g.x_min
    width = L / 8
    centers = g.x_min + width + (np.arange(n) + 0.5) / n * (L - 2 * width)
    return [BumpTest(float(c), width) for c in centers]


@dataclass(frozen=True)
class WeakResidual:
    test: object
    t1: float
    t2: float
    mass: float
    momentum: float


def weak_form_residual(field: FlowField, params: EosParams, tests=None, windows=None) -> list[WeakResidual]:
    """Signed defects of the integrated mass and momentum identities.

    mass:      int_t1^t2 int rho phi_t + rho u phi_x  -  [int rho phi]_t1^t2
    momentum:  int_t1^t2 int m phi_t + (m u + p(rho)) phi_x  -  [int m phi]_t1^t2

    Space integrals are exact for piecewise-constant data (cell integrals of
    the polynomial test); time integrals use the trapezoid rule on frames.
    """
    if field.grid.geometry != "planar" or field.expanding:
        raise NotImplementedError("weak_form_residual handles fixed planar grids")
    g = field.grid
    tests = default_tests(field) if tests is None else list(tests)
    windows = [(g.t[1], g.t_end)] if windows is None else list(windows)
    faces, t = g.faces, g.t
    u = field.velocity()
    flux_m = field.mom * u + pressure(params, field.rho)
    out = []
    for test in tests:
        lo, hi = test.support
        if lo < g.x_min - 1e-12 or hi > g.x_max + 1e-12:
            raise ValueError(f"test support [{lo:.6g}, {hi:.6g}] exceeds the grid [{g.x_min}, {g.x_max}]")
        for t1, t2 in windows:
            k1, k2 = g.frame_index(t1), g.frame_index(t2)
            if k2 <= k1:
                raise ValueError(f"window [{t1}, {t2}] must contain at least two frames")
            im, ip = [], []
            for k in range(k1, k2 + 1):
                phi, phx, pht = test.cell_integrals(faces, t[k])
                im.append(np.sum(field.rho[k] * pht + field.mom[k] * phx))
                ip.append(np.sum(field.mom[k] * pht + flux_m[k] * phx))
            tt = t[k1:k2 + 1]
            p1 = test.cell_integrals(faces, t[k1])[0]
            p2 = test.cell_integrals(faces, t[k2])[0]
            mass = np.trapezoid(im, tt) - (np.sum(field.rho[k2] * p2) - np.sum(field.rho[k1] * p1))
            mom = np.trapezoid(ip, tt) - (np.sum(field.mom[k2] * p2) - np.sum(field.mom[k1] * p1))
            out.append(WeakResidual(test, float(t[k1]), float(t[k2]), float(mass), float(mom)))
    return out


# -- energy --------------------------------------------------------------------------

def total_energy(field: FlowField, params: EosParams) -> np.ndarray:
    u = field.velocity()
    e = 0.5 * field.rho * u * u + pressure_potential(params, field.rho)
    out = np.array([np.sum(e[k] * field.cell_volumes(k)) for k in range(field.shape[0])])
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite total energy")
    return out


@dataclass(frozen=True)
class EnergyCheck:
    energies: tuple
    margin: float
    tol: float
    passed: bool


def check_energy_admissibility(field: FlowField, params: EosParams, allowance: float = 0.0,
                               rel_tol: float = 1e-8) -> EnergyCheck:
    """margin = min over later frames of E(0) - E(tau); pass iff margin >= -(rel_tol E(0) + allowance)."""
    if field.shape[0] < 2:
        raise ValueError("energy check needs at least two frames")
    e = total_energy(field, params)
    margin = float(np.min(e[0] - e[1:]))
    tol = rel_tol * abs(e[0]) + allowance
    return EnergyCheck(tuple(map(float, e)), margin, float(tol), bool(margin >= -tol))


# -- one-sided Lipschitz constant -------------------------------------------------------

LAMBDA_LABEL = "lower bound over the tested (xi, phi) family"


@dataclass(frozen=True)
class LambdaEstimate:
    t: float
    value: float
    per_scale: dict
    label: str = LAMBDA_LABEL


def _exterior_velocity(field: FlowField, k: int):
    u = field.velocity()[k]
    ok = field.rho[k] > 0
    if field.vel_closure is not None:
        u = np.where(ok, u, field.vel_closure[k])
        ok = np.ones_like(ok)
    return u, ok


def estimate_lambda(field: FlowField, t: float, widths_cells=(4, 16, 64)) -> LambdaEstimate:
    """max(0, sup_phi int v phi_x / int phi) over bumps at three scales centred on every cell.

    The tested inequality is int(-v phi_x + Lambda phi) >= 0 for phi >= 0;
    in 1D xi only scales it.  Bumps touching a cell without a velocity are
    skipped.
    """
    if field.expanding:
        raise NotImplementedError("estimate_lambda handles fixed grids")
    g = field.grid
    k = g.frame_index(t)
    v, ok = _exterior_velocity(field, k)
    if not np.any(field.rho[k] > 0) and field.vel_closure is None:
        return LambdaEstimate(float(g.t[k]), 0.0, {})
    per = {}
    best = 0.0
    dx = g.dx
    for wc in widths_cells:
        if 2 * wc + 1 > g.n_cells:
            continue
        # cell integrals of a bump centred at the origin cell, width wc cells
        f = (np.arange(-wc, wc + 2) - 0.5) * dx
        s = f / (wc * dx)
        phi = wc * dx * np.diff(_bump_antideriv(s))
        phx = np.diff(_bump(s))
        num = np.correlate(np.where(ok, v, 0.0), phx, mode="valid")
        den = np.correlate(np.ones(g.n_cells), phi, mode="valid")
        valid = np.correlate(ok.astype(float), np.abs(phi) > 0, mode="valid") == np.count_nonzero(phi)
        if not np.any(valid):
            continue
        val = float(np.max((num / den)[valid]))
        per[int(wc)] = val
        best = max(best, val)
    return LambdaEstimate(float(g.t[k]), max(best, 0.0), per)


def lambda_series(field: FlowField, widths_cells=(4, 16, 64)) -> np.ndarray:
    return np.array([estimate_lambda(field, t, widths_cells).value for t in field.grid.t])


# -- exterior velocity equation -------------------------------------------------------

def _d4(u, h, axis):
    """Fourth-order centred first derivative; NaN where the stencil leaves the array."""
    u = np.moveaxis(u, axis, -1)
    out = np.full_like(u, np.nan)
    out[..., 2:-2] = (-u[..., 4:] + 8 * u[..., 3:-1] - 8 * u[..., 1:-3] + u[..., :-4]) / (12 * h)
    return np.moveaxis(out, -1, axis)


@dataclass(frozen=True)
class ExteriorResidual:
    max_residual: float
    n_cells: int
    tol: float
    passed: bool


def vacuum_velocity_residual(field: FlowField, closure=None, tol: float = 1e-6) -> ExteriorResidual:
    """max |u_t + u u_x| over exterior cells (rho = 0 on the whole stencil).

    The exterior velocity is ``closure(t, x)`` if given, else the field's
    stored closure.  Derivatives are fourth-order centred differences in
    the lab frame.
    """
    g = field.grid
    vac = field.rho == 0
    if not np.any(vac):
        return ExteriorResidual(0.0, 0, tol, True)
    nt, nx = field.shape
    pos = np.array([field.positions(k) for k in range(nt)])
    if closure is not None:
        u = np.array([np.asarray(closure(t, pos[k]), dtype=float) * np.ones(nx) for k, t in enumerate(g.t)])
    elif field.vel_closure is not None:
        u = field.vel_closure
    else:
        raise ValueError("velocity on vacuum cells is undefined: supply a closure")
    scale = field.mesh_scale if field.expanding else np.ones(nt)
    u_xi = _d4(u, g.dx, 1)
    u_x = u_xi / scale[:, None]
    u_tau = _d4(u, g.dt, 0)
    a_dot = np.gradient(scale, g.t)
    # time derivative at fixed lab position
    u_t = u_tau - (a_dot[:, None] * g.x[None, :]) * u_x
    res = np.abs(u_t + u * u_x)
    # the whole space-time stencil must be exterior
    ext = vac.copy()
    for d in (1, 2):
        ext[:, d:] &= vac[:, :-d]
        ext[:, :-d] &= vac[:, d:]
        ext[d:, :] &= vac[:-d, :]
        ext[:-d, :] &= vac[d:, :]
    sel = ext & np.isfinite(res)
    m = float(np.max(res[sel], initial=0.0))
    return ExteriorResidual(m, int(np.count_nonzero(sel)), tol, bool(m <= tol))


# -- vacuum integrability ---------------------------------------------------------------

@dataclass(frozen=True)
class IntegrabilityReport:
    theta: float
    integrals: tuple  # ((eps, value), ...)
    ratio: float
    slope: float
    factor: float
    slope_floor: float
    passed: bool


def vacuum_integrability(field: FlowField, kernel: MollifierKernel, theta: float, eps_sequence, t1: float, t2: float,
                         factor: float = 4.0, slope_floor: float = -0.25, spacetime: bool = True) -> IntegrabilityReport:
    """int over W_eps[t1, t2] of rho_eps^-theta for each epsilon.

    Verdict: max <= factor * min over the sweep, and the log-log slope in
    epsilon is at least ``slope_floor`` (a growing integral as eps shrinks
    signals divergence).  Empty masks give 0.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    if field.grid.geometry != "planar" or field.expanding:
        raise NotImplementedError("vacuum_integrability handles fixed planar grids")
    g = field.grid
    sel = (g.t >= t1 - 1e-12) & (g.t <= t2 + 1e-12)
    if not np.any(sel):
        raise ValueError(f"no frames in [{t1}, {t2}]")
    eps = np.sort(np.asarray(eps_sequence, dtype=float))[::-1]
    vals = []
    for e in eps:
        if spacetime and np.count_nonzero(sel) > 1:
            r = convolve(field.rho, kernel, e, g.dx, g.dt, field.far_field)[sel]
            w = g.dx * g.dt
        else:
            r = np.array([convolve(field.rho[k], kernel, e, g.dx, None, field.far_field) for k in np.flatnonzero(sel)])
            w = g.dx / r.shape[0]
        mask = r > 0
        vals.append(float(np.sum(r[mask] ** (-theta)) * w) if np.any(mask) else 0.0)
    vals = np.array(vals)
    pos = vals > 0
    ratio = float(vals[pos].max() / vals[pos].min()) if np.any(pos) else 1.0
    slope = fit_slope(eps, vals) if np.count_nonzero(pos) >= 2 else 0.0
    ok = ratio <= factor and slope >= slope_floor
    return IntegrabilityReport(theta, tuple(zip(map(float, eps), map(float, vals))), ratio, float(slope), factor,
                               slope_floor, bool(ok))


# -- report --------------------------------------------------------------------------

@dataclass
class AdmissibilityReport:
    weak_residual_mass: list = field(default_factory=list)
    weak_residual_momentum: list = field(default_factory=list)
    energy_margin: float | None = None
    lambda_estimate: list = field(default_factory=list)
    vacuum_integrals: list = field(default_factory=list)
    exterior_residual: float | None = None
    verdicts: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)

    @property
    def passed(self) -> bool:
        return all(v == "pass" for v in self.verdicts.values())


def assess(field: FlowField, params: EosParams, criteria=("weak", "energy", "lambda"), allowance: float = 0.0,
           weak_tol: float = 1e-2, kernel: MollifierKernel | None = None, theta: float | None = None,
           eps_sequence=None) -> AdmissibilityReport:
    """Run the requested criteria and collect verdicts."""
    rep = AdmissibilityReport()
    for c in criteria:
        if c == "weak":
            res = weak_form_residual(field, params)
            rep.weak_residual_mass = [r.mass for r in res]
            rep.weak_residual_momentum = [r.momentum for r in res]
            worst = max(max(map(abs, rep.weak_residual_mass)), max(map(abs, rep.weak_residual_momentum)))
            rep.verdicts["weak"] = "pass" if worst <= weak_tol else "fail"
        elif c == "energy":
            ec = check_energy_admissibility(field, params, allowance)
            rep.energy_margin = ec.margin
            rep.verdicts["energy"] = "pass" if ec.passed else "fail"
        elif c == "lambda":
            rep.lambda_estimate = [(float(t), float(v)) for t, v in zip(field.grid.t, lambda_series(field))]
            rep.verdicts["lambda"] = "pass" if all(np.isfinite(v) for _, v in rep.lambda_estimate) else "fail"
        elif c == "exterior":
            er = vacuum_velocity_residual(field)
            rep.exterior_residual = er.max_residual
            rep.verdicts["exterior"] = "pass" if er.passed else "fail"
        elif c == "integrability":
            if kernel is None or theta is None or eps_sequence is None:
                raise ValueError("integrability needs kernel, theta and eps_sequence")
            g = field.grid
            ir = vacuum_integrability(field, kernel, theta, eps_sequence, g.t_start, g.t_end)
            rep.vacuum_integrals = [list(p) for p in ir.integrals]
            rep.verdicts["integrability"] = "pass" if ir.passed else "fail"
        else:
            raise ValueError(f"unknown criterion {c!r}")
    return rep
