"""Command-line driver.

Subcommands: simulate, riemann, check, besov, commutator-rate, relenergy,
exponents, example4 {run, monitor, integrability}.  Exit status is 0 when
every evaluated criterion passes, 1 when one fails and 2 on usage or
configuration errors.  Artifacts are written atomically; each run that
writes files also writes ``manifest.json``.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .io import atomic_write, digest, fmt_float, line_svg, loglog_svg, write_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    pass


# -- configuration -------------------------------------------------------------------

def _tuple_of_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


_TYPES = {"float": float, "int": int, "str": str, "floats": _tuple_of_floats}

# section -> key -> (type, required, default)
SIMULATE_SCHEMA = {
    "grid": {
        "x_min": ("float", True, None),
        "x_max": ("float", True, None),
        "n_cells": ("int", True, None),
        "t_end": ("float", True, None),
        "n_steps": ("int", True, None),
    },
    "eos": {"gamma": ("float", True, None), "kappa": ("float", False, 1.0)},
    "scheme": {
        "flux": ("str", False, "rusanov"),
        "cfl": ("float", False, 0.45),
        "limiter": ("str", False, "none"),
        "eps_vel": ("float", False, None),
    },
    "initial": {
        "rho_l": ("float", True, None),
        "u_l": ("float", True, None),
        "rho_r": ("float", True, None),
        "u_r": ("float", True, None),
        "x0": ("float", False, 0.0),
        "bump_amplitude": ("float", False, 0.0),
        "bump_center": ("float", False, 0.0),
        "bump_width": ("float", False, 0.25),
    },
}

EXAMPLE4_SCHEMA = {
    "example4": {
        "R": ("float", False, 1.0),
        "N_profile": ("float", False, 4.0),
        "theta": ("float", False, 0.125),
        "s_reg": ("float", False, 3.0),
        "T": ("float", False, 1.0),
        "n_cells": ("int", False, 1024),
        "n_frames": ("int", False, 41),
        "r_max_factor": ("float", False, 2.0),
        "amplitude": ("float", False, 1.0),
        "gamma": ("float", False, 2.0),
        "kappa": ("float", False, 1.0),
        "eps_seq": ("floats", False, (0.2, 0.1, 0.05, 0.025)),
        "delta_seq": ("floats", False, (1e-2, 1e-3, 1e-4, 1e-5)),
    },
}


def load_config(path, schema: dict) -> tuple[dict, str]:
    """Parse an INI file against ``schema``; returns (values, text)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    unknown = set(cp.sections()) - set(schema)
    if unknown:
        raise ConfigError(f"unknown section [{sorted(unknown)[0]}]")
    out = {}
    for sec, keys in schema.items():
        got = dict(cp[sec]) if cp.has_section(sec) else {}
        extra = set(got) - set(keys)
        if extra:
            raise ConfigError(f"unknown field {sec}.{sorted(extra)[0]}")
        vals = {}
        for key, (typ, required, default) in keys.items():
            if key not in got or (not got[key].strip() and not required):
                if key not in got and required:
                    raise ConfigError(f"missing field {sec}.{key}")
                vals[key] = default
                continue
            try:
                vals[key] = _TYPES[typ](got[key])
            except ValueError:
                raise ConfigError(f"field {sec}.{key}: cannot read {got[key]!r} as {typ}") from None
        out[sec] = vals
    return out, text


# -- manifest --------------------------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    config_digest: str
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    toolkit_version: str = __version__
    parameters: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> Path:
        self.outputs = sorted(self.outputs)
        return atomic_write(out_dir / "manifest.json", json.dumps(asdict(self), sort_keys=True, indent=1) + "\n")


def _workers() -> int:
    raw = os.environ.get("TOOLKIT_THREADS", "")
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"TOOLKIT_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"TOOLKIT_THREADS must be a positive integer, got {raw!r}")
    return n


def _slope(v: float) -> float:
    return float(format(v, ".6g")) if np.isfinite(v) else v


def _finite(obj):
    # strict JSON: non-finite floats become the strings "inf", "-inf", "nan"
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    if isinstance(obj, (float, np.floating)) and not np.isfinite(obj):
        return str(float(obj))
    return obj


def _dumps(obj) -> str:
    return json.dumps(_finite(obj), sort_keys=True, indent=1, default=_default, allow_nan=False) + "\n"


def _default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o)}")


def _table(rows, header=("criterion", "value", "verdict")) -> str:
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells)


# -- commands ----------------------------------------------------------------------------

def _simulation_inputs(cfg: dict):
    from .core import Grid
    from .eos import EosParams
    from .solver import RiemannSetup, SchemeConfig

    g = cfg["grid"]
    try:
        grid = Grid(g["x_min"], g["x_max"], g["n_cells"], 0.0, g["t_end"], g["n_steps"])
        params = EosParams(cfg["eos"]["kappa"], cfg["eos"]["gamma"])
        s = cfg["scheme"]
        scheme = SchemeConfig(flux=s["flux"], cfl=s["cfl"], limiter=s["limiter"], eps_vel=s["eps_vel"])
        i = cfg["initial"]
        setup = RiemannSetup(i["rho_l"], i["u_l"], i["rho_r"], i["u_r"], params, i["x0"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return grid, params, scheme, setup


def cmd_simulate(args) -> int:
    from .admissibility import check_energy_admissibility
    from .core import save_field
    from .solver import solve

    cfg, text = load_config(args.config, SIMULATE_SCHEMA)
    grid, params, scheme, setup = _simulation_inputs(cfg)
    i = cfg["initial"]

    def rho0(x):
        base = np.where(x < setup.x0, setup.rho_l, setup.rho_r)
        s = (x - i["bump_center"]) / i["bump_width"]
        return base * (1 + i["bump_amplitude"] * np.where(np.abs(s) < 1, (1 - s * s) ** 3, 0.0))

    def u0(x):
        return np.where(x < setup.x0, setup.u_l, setup.u_r)

    field_ = solve(grid, rho0, u0, scheme, params)
    out = Path(args.out)
    run_csv, run_json = save_field(field_, out / "run.csv")
    ec = check_energy_admissibility(field_, params)
    write_csv(out / "energy.csv", ["t", "energy"], zip(grid.t, ec.energies))
    man = RunManifest("simulate", digest(text), [str(args.config)],
                      [run_csv.name, run_json.name, "energy.csv"], parameters={"steps": field_.meta["steps"]})
    man.write(out)
    print(_table([("energy", fmt_float(ec.margin), "pass" if ec.passed else "fail")]))
    return EXIT_OK


def cmd_riemann(args) -> int:
    from .core import save_field
    from .solver import RarefactionSolution

    cfg, text = load_config(args.config, SIMULATE_SCHEMA)
    grid, params, scheme, setup = _simulation_inputs(cfg)
    try:
        sol = RarefactionSolution(setup)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(args.out)
    f = sol.sample(grid)
    a, b = save_field(f, out / "exact.csv")
    waves = {k: float(v) for k, v in sol.wave_speeds().items()}
    atomic_write(out / "waves.json", _dumps({"vacuum": bool(sol.vacuum), "wave_speeds": waves}))
    RunManifest("riemann", digest(text), [str(args.config)], [a.name, b.name, "waves.json"]).write(out)
    print(_table([(k, fmt_float(v), "") for k, v in sorted(waves.items())], ("wave", "speed", "")))
    return EXIT_OK


def _params_for(field_, args):
    from .eos import EosParams

    eos = field_.meta.get("eos") if isinstance(field_.meta, dict) else None
    gamma = args.gamma if args.gamma is not None else (eos or {}).get("gamma")
    kappa = args.kappa if args.kappa is not None else (eos or {}).get("kappa", 1.0)
    if gamma is None:
        raise ConfigError("the input carries no equation of state: pass --gamma")
    return EosParams(float(kappa), float(gamma))


def cmd_check(args) -> int:
    from . import admissibility as adm
    from .core import load_field

    path = Path(args.input)
    if not path.is_file() or not path.with_suffix(".json").is_file():
        raise ConfigError(f"input not found: {path} (with its .json sidecar)")
    f = load_field(path)
    params = _params_for(f, args)
    rows, report, ok = [], {}, True
    for crit in args.criterion:
        if crit == "energy":
            ec = adm.check_energy_admissibility(f, params, allowance=args.allowance)
            rows.append(("energy", fmt_float(ec.margin), "pass" if ec.passed else "fail"))
            report["energy"] = asdict(ec)
            ok &= ec.passed
        elif crit == "weak":
            res = adm.weak_form_residual(f, params)
            worst = max(max(abs(r.mass), abs(r.momentum)) for r in res)
            passed = worst <= args.weak_tol
            rows.append(("weak", fmt_float(worst), "pass" if passed else "fail"))
            report["weak"] = [{"center": r.test.center, "width": r.test.width, "t1": r.t1, "t2": r.t2,
                               "mass": r.mass, "momentum": r.momentum} for r in res]
            ok &= passed
        elif crit == "lambda":
            lam = adm.lambda_series(f)
            rows.append(("lambda", fmt_float(float(lam.max())), "lower bound"))
            report["lambda"] = {"t": f.grid.t.tolist(), "value": lam.tolist(), "label": adm.LAMBDA_LABEL}
        elif crit == "exterior":
            er = adm.vacuum_velocity_residual(f)
            rows.append(("exterior", fmt_float(er.max_residual), "pass" if er.passed else "fail"))
            report["exterior"] = asdict(er)
            ok &= er.passed
    print(_table(rows))
    if args.out:
        atomic_write(Path(args.out), _dumps(report))
    return EXIT_OK if ok else EXIT_FAIL


def _field_1d(name: str, x, alpha: float, x0: float):
    from .besov import cusp, sawtooth, weierstrass_saw

    if name == "cusp":
        return cusp(x, x0, alpha)
    if name == "sine":
        return np.sin(2 * np.pi * x)
    if name == "sawtooth":
        return sawtooth(x)
    if name == "weierstrass":
        return weierstrass_saw(x, alpha)
    if name == "constant":
        return np.ones_like(x)
    raise ConfigError(f"unknown field {name!r}")


def cmd_besov(args) -> int:
    from .besov import verify_mollification_rates
    from .mollify import MollifierKernel

    n = args.n_cells
    dx = 1.0 / n
    x = (np.arange(n) + 0.5) * dx
    if args.input:
        p = Path(args.input)
        if not p.is_file():
            raise ConfigError(f"input not found: {p}")
        data = np.genfromtxt(p, delimiter=",", names=True)
        if data.dtype.names is None or set(data.dtype.names) < {"x", "u"}:
            raise ConfigError(f"{p}: expected columns x,u")
        x, u = np.asarray(data["x"], float), np.asarray(data["u"], float)
        dx = float(x[1] - x[0])
    else:
        x0 = x[n // 2] if args.x0 is None else args.x0
        u = _field_1d(args.field, x, args.alpha, x0)
    q = float("inf") if args.q == "inf" else float(args.q)
    eps = 2.0 ** -np.arange(args.k_min, args.k_max + 1)
    rep = verify_mollification_rates(u, dx, MollifierKernel(), args.alpha, q, eps, tol=args.tol)
    rows = [("slope_error", fmt_float(_slope(rep.slope_error), 6), f">= {args.alpha - args.tol:g}"),
            ("slope_gradient", fmt_float(_slope(rep.slope_gradient), 6), f">= {args.alpha - 1 - args.tol:g}"),
            ("verdict", "", "pass" if rep.passed else "fail")]
    print(_table(rows, ("quantity", "value", "target")))
    if args.out:
        out = Path(args.out)
        write_csv(out / "rates.csv", ["eps", "error_norm", "gradient_norm"], rep.rows())
        loglog_svg(out / "rates.svg", {"|u_eps - u|": (rep.eps, rep.error_norms),
                                       "|grad u_eps|": (rep.eps, rep.gradient_norms)})
        d = asdict(rep)
        d["slope_error"], d["slope_gradient"] = _slope(rep.slope_error), _slope(rep.slope_gradient)
        atomic_write(out / "report.json", _dumps(d))
        RunManifest("besov", digest(json.dumps(vars(args), sort_keys=True, default=str)),
                    [args.input] if args.input else [], ["rates.csv", "rates.svg", "report.json"],
                    parameters={k: v for k, v in vars(args).items() if k != "func"}).write(out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_commutator(args) -> int:
    from .commutator import NONLINEARITIES, measure_rate, weierstrass_field
    from .mollify import MollifierKernel

    n = args.n_cells
    dx = 1.0 / n
    x = (np.arange(n) + 0.5) * dx
    f = weierstrass_field(x, args.alpha1, dx=dx)
    g = weierstrass_field(x, args.alpha2, 0.25, dx=dx)
    G = NONLINEARITIES[args.G]()
    eps = 2.0 ** -np.arange(args.k_min, args.k_max + 1)
    rep = measure_rate(f, g, G, MollifierKernel(), args.alpha1, args.alpha2, args.q, eps, dx,
                       far_field="periodic", tol=args.tol)
    print(_table([("fitted_slope", fmt_float(_slope(rep.fitted_slope), 6), rep.status),
                  ("predicted_slope", fmt_float(_slope(rep.predicted_slope), 6), "")],
                 ("quantity", "value", "verdict")))
    if args.out:
        out = Path(args.out)
        write_csv(out / "commutator.csv", ["eps", "norm"], rep.rows())
        eps_arr = np.array(rep.eps)
        ref = (eps_arr, rep.norms[-1] * (eps_arr / eps_arr[-1]) ** rep.predicted_slope, "predicted")
        loglog_svg(out / "commutator.svg", {"|C_eps|": (rep.eps, rep.norms)}, reference=ref)
        d = asdict(rep)
        d["fitted_slope"], d["status"] = _slope(rep.fitted_slope), rep.status
        atomic_write(out / "report.json", _dumps(d))
        RunManifest("commutator-rate", digest(json.dumps(vars(args), sort_keys=True, default=str)), [],
                    ["commutator.csv", "commutator.svg", "report.json"],
                    parameters={k: v for k, v in vars(args).items() if k != "func"}).write(out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_relenergy(args) -> int:
    from .core import load_field
    from .relative_energy import relative_energy_series

    for p in (args.weak, args.strong):
        if not Path(p).is_file():
            raise ConfigError(f"input not found: {p}")
    w, s = load_field(args.weak), load_field(args.strong)
    params = _params_for(w, args)
    try:
        E = relative_energy_series(w, s, params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = list(zip(w.grid.t, E))
    if args.out:
        write_csv(Path(args.out), ["t", "relative_energy"], rows)
    print(_table([(fmt_float(t), fmt_float(e), "") for t, e in rows], ("t", "E", "")))
    return EXIT_OK


def cmd_exponents(args) -> int:
    from .exponents import FULL_NAMES, solve_window, verify_full_system

    try:
        w = solve_window(args.gamma, args.alpha, args.beta, args.theta, args.q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    d = w.to_dict()
    text = _dumps(d)
    print(text, end="")
    if w.feasible:
        rep = verify_full_system(w, *w.midpoint())
        print(_table([(n, fmt_float(rep.slacks[n]), "ok" if rep.slacks[n] > 0 else "violated") for n in FULL_NAMES],
                     ("inequality", "slack at midpoint", "")))
    else:
        for r in w.reasons:
            print(f"infeasible: {r}")
    if args.out:
        atomic_write(Path(args.out), text)
    return EXIT_OK if w.feasible else EXIT_FAIL


def _example4_config(path):
    from .vacuum_example import Example4Config

    cfg, text = load_config(path, EXAMPLE4_SCHEMA)
    try:
        return Example4Config(**cfg["example4"]), text
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _example4_run(cfg, args):
    from .core import load_field
    from .vacuum_example import run_example

    if getattr(args, "input", None):
        p = Path(args.input)
        if not p.is_file():
            raise ConfigError(f"input not found: {p}")
        return load_field(p)
    return run_example(cfg)


def cmd_example4(args) -> int:
    from .core import save_field
    from .mollify import MollifierKernel
    from .vacuum_example import check_uniform_integrability, gronwall_monitor, track_boundary

    cfg, text = _example4_config(args.config)
    out = Path(args.out)
    outputs = []
    ok = True
    run = _example4_run(cfg, args)
    if args.action == "run":
        a, b = save_field(run, out / "run.csv")
        tr = track_boundary(run, cfg.R, cfg.N_profile)
        write_csv(out / "radius.csv", ["t", "radius", "exact", "error", "cell_width"],
                  zip(tr.t, tr.radius, tr.exact, tr.error, tr.cell_width))
        line_svg(out / "radius.svg", {"tracked": (tr.t, tr.radius), "(1+t)R": (tr.t, tr.exact)}, "t", "radius")
        outputs += [a.name, b.name, "radius.csv", "radius.svg"]
        ok = tr.passed()
        print(_table([("boundary", fmt_float(tr.max_error_cells, 6) + " cells", "pass" if ok else "fail")]))
    elif args.action == "monitor":
        gm = gronwall_monitor(run, cfg.theta, args.eps_floor, cfg.R)
        write_csv(out / "gronwall.csv", ["t", "J", "log_growth", "allowed", "boundary_transport", "boundary_flux"],
                  zip(gm.t, gm.J, gm.log_growth, gm.allowed, gm.boundary_transport, gm.boundary_flux))
        outputs.append("gronwall.csv")
        ok = gm.passed
        print(_table([("gronwall", fmt_float(_slope(gm.rate), 6), "pass" if ok else "fail"),
                      ("boundary_cancellation", fmt_float(gm.cancellation_defect(), 6), "")]))
    else:
        thetas = [cfg.theta] + ([args.counter_theta] if args.counter_theta else [])

        def one(th):
            return check_uniform_integrability(run, MollifierKernel.onesided_for(th, 2), th, cfg.delta_seq,
                                               cfg.eps_seq, cfg.R)

        with ThreadPoolExecutor(max_workers=min(_workers(), len(thetas))) as pool:
            results = list(pool.map(one, thetas))
        rows = []
        for th, res in zip(thetas, results):
            tag = "main" if th == cfg.theta else "counter"
            name = f"integrability_{tag}"
            write_csv(out / f"{name}.csv", ["eps", "delta", "lhs", "jensen_rhs"], res.table)
            atomic_write(out / f"{name}.json", res.to_json() + "\n")
            outputs += [f"{name}.csv", f"{name}.json"]
            rows.append((f"{tag} N*theta={cfg.N_profile * th:g}", fmt_float(res.uniform_ratio, 6),
                         "pass" if res.passed else "flagged"))
        ok = results[0].passed and all(not r.passed for r in results[1:])
        print(_table(rows, ("case", "max/min over eps", "verdict")))
    RunManifest(f"example4 {args.action}", digest(text), [str(args.config)], outputs,
                parameters=cfg.to_dict()).write(out)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eulervac", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="finite-volume run from an INI config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("riemann", help="exact rarefaction solution on the config grid")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_riemann)

    s = sub.add_parser("check", help="admissibility criteria on a saved run")
    s.add_argument("--input", required=True)
    s.add_argument("--criterion", action="append", choices=("energy", "weak", "lambda", "exterior"), required=True)
    s.add_argument("--allowance", type=float, default=0.0)
    s.add_argument("--weak-tol", type=float, default=1e-2)
    s.add_argument("--gamma", type=float)
    s.add_argument("--kappa", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("besov", help="mollification rates of a 1D field")
    s.add_argument("--field", default="cusp", choices=("cusp", "sine", "sawtooth", "weierstrass", "constant"))
    s.add_argument("--input")
    s.add_argument("--n-cells", type=int, default=4096)
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--q", default="inf")
    s.add_argument("--x0", type=float)
    s.add_argument("--k-min", type=int, default=3)
    s.add_argument("--k-max", type=int, default=8)
    s.add_argument("--tol", type=float, default=0.05)
    s.add_argument("--out")
    s.set_defaults(func=cmd_besov)

    s = sub.add_parser("commutator-rate", help="decay of the mollification commutator")
    s.add_argument("--G", default="product", choices=("product", "affine", "kinetic"))
    s.add_argument("--alpha1", type=float, default=0.8)
    s.add_argument("--alpha2", type=float, default=0.8)
    s.add_argument("--q", type=float, default=4.0)
    s.add_argument("--n-cells", type=int, default=4096)
    s.add_argument("--k-min", type=int, default=4)
    s.add_argument("--k-max", type=int, default=8)
    s.add_argument("--tol", type=float, default=0.1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_commutator)

    s = sub.add_parser("relenergy", help="relative energy series between two saved fields")
    s.add_argument("--weak", required=True)
    s.add_argument("--strong", required=True)
    s.add_argument("--gamma", type=float)
    s.add_argument("--kappa", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_relenergy)

    s = sub.add_parser("exponents", help="(kappa_exp, nu) window for given exponents")
    for name in ("gamma", "alpha", "beta", "theta", "q"):
        s.add_argument(f"--{name}", type=float, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_exponents)

    s = sub.add_parser("example4", help="expanding compactly supported radial example")
    s.add_argument("action", choices=("run", "monitor", "integrability"))
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--input", help="saved run to reuse instead of recomputing")
    s.add_argument("--eps-floor", type=float, default=1e-3)
    s.add_argument("--counter-theta", type=float, help="second theta expected to be flagged")
    s.set_defaults(func=cmd_example4)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
