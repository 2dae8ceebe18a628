"""Grids, discrete space-time fields and the certificates shared by the toolkit.

A :class:`FlowField` stores density and momentum on a uniform cell-centred grid
for a sequence of output frames.  Velocity is never stored directly except as
an optional closure on vacuum cells, where the weak formulation leaves it
undetermined.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

GEOMETRIES = ("planar", "radial")
ROLES = ("weak", "strong")
FAR_FIELDS = ("zero", "constant", "periodic")


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid in space plus a uniform set of output times.

    ``dim == 2`` is only meaningful together with ``geometry == "radial"``,
    in which case the space coordinate is the radius.
    """

    x_min: float
    x_max: float
    n_cells: int
    t_start: float = 0.0
    t_end: float = 1.0
    n_steps: int = 2
    dim: int = 1
    geometry: str = "planar"

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min < x_max required, got {self.x_min}, {self.x_max}")
        if not self.t_start < self.t_end:
            raise ValueError(f"t_start < t_end required, got {self.t_start}, {self.t_end}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 8:
            raise ValueError(f"n_cells must be an integer >= 8, got {self.n_cells}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ValueError(f"n_steps must be an integer >= 2, got {self.n_steps}")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"unknown geometry {self.geometry!r}")
        if self.dim not in (1, 2):
            raise ValueError("only dim 1 (planar) and dim 2 (radial reduction) are supported")
        if self.dim == 2 and self.geometry != "radial":
            raise ValueError("dim=2 is only available through the radial reduction")
        if self.geometry == "radial" and self.x_min < 0:
            raise ValueError("radial grids need x_min >= 0")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / (self.n_steps - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_steps)

    def cell_volumes(self) -> np.ndarray:
        """Cell measures: dx for planar grids, 2*pi*r*dr for the radial reduction."""
        if self.geometry == "radial":
            # exact annulus area: pi (r_out^2 - r_in^2) = 2 pi r_c dr
            return 2.0 * np.pi * self.x * self.dx
        return np.full(self.n_cells, self.dx)

    def frame_index(self, t: float, atol: float = 1e-9) -> int:
        k = int(np.argmin(np.abs(self.t - t)))
        if abs(self.t[k] - t) > atol * max(1.0, abs(t)):
            raise ValueError(f"time {t} is not an output frame of this grid")
        return k

    def to_dict(self) -> dict:
        return {
            "x_min": self.x_min,
            "x_max": self.x_max,
            "n_cells": self.n_cells,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "n_steps": self.n_steps,
            "dim": self.dim,
            "geometry": self.geometry,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(**d)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FlowField:
    """Density and momentum samples of shape ``(n_steps, n_cells)``.

    ``vel_closure`` optionally carries the velocity on vacuum cells (where
    ``rho == 0``), used for the exterior transport check.  ``mesh_scale`` is a
    per-frame stretch factor for runs on an expanding mesh: the physical
    position of cell ``i`` in frame ``k`` is ``mesh_scale[k] * grid.x[i]``.
    """

    grid: Grid
    rho: np.ndarray
    mom: np.ndarray
    role: str = "weak"
    far_field: str = "zero"
    vel_closure: Optional[np.ndarray] = None
    mesh_scale: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (self.grid.n_steps, self.grid.n_cells)
        rho = _frozen(self.rho)
        mom = _frozen(self.mom)
        if rho.shape != shape or mom.shape != shape:
            raise ValueError(f"rho and mom must have shape {shape}, got {rho.shape}, {mom.shape}")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(mom))):
            raise ValueError("FlowField entries must be finite")
        if np.any(rho < 0):
            k, i = np.argwhere(rho < 0)[0]
            raise ValueError(f"negative density {rho[k, i]} at frame {k}, cell {i}")
        if np.any(mom[rho == 0] != 0):
            raise ValueError("momentum must vanish on vacuum cells")
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}")
        if self.far_field not in FAR_FIELDS:
            raise ValueError(f"far_field must be one of {FAR_FIELDS}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "mom", mom)
        if self.vel_closure is not None:
            vc = _frozen(self.vel_closure)
            if vc.shape != shape:
                raise ValueError("vel_closure must match the field shape")
            object.__setattr__(self, "vel_closure", vc)
        if self.mesh_scale is not None:
            ms = _frozen(self.mesh_scale)
            if ms.shape != (self.grid.n_steps,) or np.any(ms <= 0):
                raise ValueError("mesh_scale must be positive with one entry per frame")
            object.__setattr__(self, "mesh_scale", ms)

    @property
    def shape(self) -> tuple:
        return self.rho.shape

    @property
    def expanding(self) -> bool:
        return self.mesh_scale is not None and not np.all(self.mesh_scale == 1.0)

    def velocity(self, fill: float = 0.0) -> np.ndarray:
        """m/rho on non-vacuum cells; the closure (or ``fill``) on vacuum cells."""
        u = np.full(self.shape, fill, dtype=float)
        pos = self.rho > 0
        u[pos] = self.mom[pos] / self.rho[pos]
        if self.vel_closure is not None:
            u[~pos] = self.vel_closure[~pos]
        return u

    def positions(self, k: int) -> np.ndarray:
        s = 1.0 if self.mesh_scale is None else self.mesh_scale[k]
        return s * self.grid.x

    def cell_volumes(self, k: int = 0) -> np.ndarray:
        vol = self.grid.cell_volumes()
        if self.mesh_scale is not None:
            vol = vol * self.mesh_scale[k] ** self.grid.dim
        return vol

    def mass(self) -> np.ndarray:
        """Total mass per frame."""
        return np.array([np.sum(self.rho[k] * self.cell_volumes(k)) for k in range(self.shape[0])])

    def with_role(self, role: str) -> "FlowField":
        return replace(self, role=role)


def _call(f: Callable, t, x, time_dependent: bool):
    out = f(t, x) if time_dependent else f(x)
    return np.broadcast_to(np.asarray(out, dtype=float), np.shape(x)).copy()


def build_field(
    grid: Grid,
    rho_init: Callable,
    u_init: Callable,
    *,
    time_dependent: bool = False,
    role: str = "weak",
    far_field: str = "zero",
    keep_closure: bool = True,
) -> FlowField:
    """Sample initialisers at cell centres of every frame.

    With ``time_dependent=True`` the callables take ``(t, x)``, otherwise
    ``(x)`` and every frame is identical.  Momentum is ``rho * u`` and is set
    to zero on vacuum cells; the velocity there is kept as ``vel_closure``
    when ``keep_closure`` is true and ``u_init`` is finite on those cells.
    """
    x = grid.x
    rho = np.empty((grid.n_steps, grid.n_cells))
    u = np.empty_like(rho)
    for k, t in enumerate(grid.t):
        rho[k] = _call(rho_init, t, x, time_dependent)
        bad = np.flatnonzero(rho[k] < 0)
        if bad.size:
            raise ValueError(f"negative density {rho[k, bad[0]]} in cell {bad[0]} (x={x[bad[0]]:.6g}, t={t:.6g})")
        with np.errstate(all="ignore"):
            u[k] = _call(u_init, t, x, time_dependent)
        pos = rho[k] > 0
        if not np.all(np.isfinite(u[k][pos])):
            i = np.flatnonzero(pos & ~np.isfinite(u[k]))[0]
            raise ValueError(f"velocity not finite at non-vacuum cell {i}")
    mom = np.where(rho > 0, rho * np.where(np.isfinite(u), u, 0.0), 0.0)
    closure = None
    vac = rho == 0
    if keep_closure and np.any(vac) and np.all(np.isfinite(u[vac])):
        closure = np.where(vac, u, 0.0)
    return FlowField(grid, rho, mom, role=role, far_field=far_field, vel_closure=closure)


def restrict_window(field: FlowField, t1: float, t2: float) -> FlowField:
    """Keep the frames with ``t1 <= t <= t2``; both ends must be output frames."""
    g = field.grid
    if not t1 < t2:
        raise ValueError(f"empty window [{t1}, {t2}]")
    if t1 < g.t_start - 1e-12 or t2 > g.t_end + 1e-12:
        raise ValueError("window exceeds the field's time interval")
    k1, k2 = g.frame_index(t1), g.frame_index(t2)
    if k2 - k1 < 1:
        raise ValueError("window contains fewer than two frames")
    sub = replace(g, t_start=float(g.t[k1]), t_end=float(g.t[k2]), n_steps=k2 - k1 + 1)
    sl = slice(k1, k2 + 1)
    return replace(
        field,
        grid=sub,
        rho=field.rho[sl],
        mom=field.mom[sl],
        vel_closure=None if field.vel_closure is None else field.vel_closure[sl],
        mesh_scale=None if field.mesh_scale is None else field.mesh_scale[sl],
    )


@dataclass(frozen=True)
class VacuumNeighborhood:
    """Positivity set of a mollified density, ``{rho_eps > 0}``, on the field's frames."""

    epsilon: float
    mask: np.ndarray
    t: np.ndarray

    def fraction(self) -> float:
        return float(np.mean(self.mask))


@dataclass(frozen=True)
class RegularityCertificate:
    """Exponents and bounds a strong solution must exhibit.

    ``lambda_samples`` is Lambda(t) sampled at ``lambda_times``.
    """

    alpha: float
    beta: float
    q: float
    theta: float
    c1: float
    gamma: float
    lambda_times: np.ndarray
    lambda_samples: np.ndarray

    def violations(self) -> list[str]:
        from .exponents import theta_threshold

        out = []
        g = self.gamma
        if not (self.alpha >= self.beta > 1.0 / min(2.0, g)):
            out.append(f"need alpha >= beta > 1/min(2, gamma) = {1.0 / min(2.0, g):.6g}")
        if self.q < 2 * g / (g - 1):
            out.append(f"need q >= 2 gamma/(gamma - 1) = {2 * g / (g - 1):.6g}")
        if self.beta <= 1.0:
            try:
                thr = theta_threshold(g, self.beta)
            except ValueError:
                thr = None
            if thr is not None and not self.theta > thr:
                out.append(f"theta={self.theta} does not exceed threshold {thr:.6g}")
        lam = np.asarray(self.lambda_samples, dtype=float)
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            out.append("Lambda must be finite and nonnegative")
        elif len(lam) > 1 and not np.isfinite(np.trapezoid(lam, self.lambda_times)):
            out.append("Lambda is not integrable")
        if not np.isfinite(self.c1):
            out.append("C1 must be finite")
        return out

    @property
    def valid(self) -> bool:
        return not self.violations()


# -- serialisation -----------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def save_field(field: FlowField, path) -> tuple[Path, Path]:
    """Write ``path`` (CSV: t, x, rho, mom) and a JSON sidecar next to it."""
    from .io import atomic_write

    path = Path(path)
    lines = ["t,x,rho,mom"]
    x = field.grid.x
    for k, t in enumerate(field.grid.t):
        for i in range(field.grid.n_cells):
            lines.append(f"{_fmt(t)},{_fmt(x[i])},{_fmt(field.rho[k, i])},{_fmt(field.mom[k, i])}")
    atomic_write(path, "\n".join(lines) + "\n")
    side = {
        "grid": field.grid.to_dict(),
        "role": field.role,
        "far_field": field.far_field,
        "meta": field.meta,
    }
    if field.mesh_scale is not None:
        side["mesh_scale"] = [_fmt(s) for s in field.mesh_scale]
    if field.vel_closure is not None:
        side["vel_closure"] = [[_fmt(v) for v in row] for row in field.vel_closure]
    sidecar = path.with_suffix(".json")
    atomic_write(sidecar, json.dumps(side, indent=1, sort_keys=True) + "\n")
    return path, sidecar


def load_field(path) -> FlowField:
    path = Path(path)
    side = json.loads(path.with_suffix(".json").read_text())
    grid = Grid.from_dict(side["grid"])
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["t", "x", "rho", "mom"]:
        raise ValueError(f"{path}: unexpected header {rows[0]}")
    data = np.array([[float(v) for v in r] for r in rows[1:]])
    if data.shape[0] != grid.n_steps * grid.n_cells:
        raise ValueError(f"{path}: expected {grid.n_steps * grid.n_cells} rows, found {data.shape[0]}")
    rho = data[:, 2].reshape(grid.n_steps, grid.n_cells)
    mom = data[:, 3].reshape(grid.n_steps, grid.n_cells)
    ms = side.get("mesh_scale")
    vc = side.get("vel_closure")
    return FlowField(
        grid,
        rho,
        mom,
        role=side.get("role", "weak"),
        far_field=side.get("far_field", "zero"),
        vel_closure=None if vc is None else np.array(vc, dtype=float),
        mesh_scale=None if ms is None else np.array(ms, dtype=float),
        meta=side.get("meta", {}),
    )
