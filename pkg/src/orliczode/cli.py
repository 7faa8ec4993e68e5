"""Command-line driver.

Every command reads one JSON config, writes ``<command>.json`` (and CSV
data where it makes sense) into ``--out`` and exits with

    0  success
    1  a hypothesis of the theorem fails (a correct negative result)
    2  bad usage or config
    3  numeric failure

On a nonzero exit a single JSON line ``{"exit": k, "reason": ...}`` goes
to stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import exprlang
from .eos import PhiFunction, build_eos, equivalence_batch, verify_tail_bound
from .errors import ConfigError, HypothesisViolation, NumericFailure
from .families import FAMILY_NAMES, smooth_bump, test_family
from .illposed import IllposedConfig, demonstrate
from .ode1 import FirstOrderProblem, solve_first_order, wellposed_report_1
from .orlicz import NFunction, luxemburg_norm
from .realline import Decay, Grid, GridFunction, load_csv, lp_norm, save_csv
from .sturm import Potential, geometry, green_build, solve_linear, solve_nonlinear, verify_green_bounds, wellposed_report_2

COMMANDS = ("norm", "eos-equivalence", "solve1", "geometry", "green", "solve2", "illposed", "verify-all")
DEFAULT_GRID = {"radius": 40.0, "nodes": 4001}


# deterministic JSON: floats always as 17 significant digits


def _emit(obj) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return format(v, ".17g")
        return json.dumps("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_emit(v)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0])))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_emit(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return _emit(obj) + "\n"


def _grid(cfg: dict) -> Grid:
    g = {**DEFAULT_GRID, **cfg.get("grid", {})}
    X, n = float(g["radius"]), int(g["nodes"])
    if not X > 0:
        raise ConfigError("grid radius must be positive")
    if n < 64:
        raise ConfigError("grid needs at least 64 nodes")
    return Grid.uniform(X, n)


def _function(spec, grid: Grid, base: Path) -> GridFunction:
    """A function given inline (``{"expr": ..., "decay": ...}``) or as ``{"csv": path}``."""
    if isinstance(spec, str):
        spec = {"expr": spec}
    if not isinstance(spec, dict):
        raise ConfigError("function spec must be an object or an expression string")
    decay = Decay.from_dict(spec["decay"]) if "decay" in spec else None
    if "csv" in spec:
        f = load_csv(base / spec["csv"], decay)
        if not np.array_equal(f.x, grid.nodes):
            f = GridFunction(grid, np.interp(grid.nodes, f.x, f.values, left=0.0, right=0.0), f.decay)
        return f
    if "expr" in spec:
        e = exprlang.parse(spec["expr"])
        vals = exprlang.evaluate(e, x=grid.nodes, y=0.0)
        return GridFunction(grid, vals, decay or Decay.unknown())
    raise ConfigError("function spec needs 'expr' or 'csv'")


def _batch(cfg: dict, grid: Grid, base: Path) -> list[GridFunction]:
    b = cfg.get("batch", "family")
    if b == "family":
        return test_family(grid)
    if isinstance(b, list):
        return [_function(s, grid, base) for s in b]
    raise ConfigError("batch must be 'family' or a list of function specs")


def _save_table(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([format(float(v), ".17g") for v in r])


def cmd_norm(cfg, grid, out, base):
    f = _function(cfg.get("function", cfg.get("g")), grid, base)
    N = NFunction.from_config(cfg.get("n_function", {"family": "power", "p": 2}))
    return {"value": luxemburg_norm(f, N), "lp": {str(p): lp_norm(f, p) for p in (1, 2, math.inf)}}


def _eos_from(cfg):
    if "phi" not in cfg:
        raise ConfigError("config needs 'phi'")
    return build_eos(float(cfg.get("alpha", 1.0)), PhiFunction.from_config(cfg["phi"]))


def cmd_eos_equivalence(cfg, grid, out, base):
    eos = _eos_from(cfg)
    fs = _batch(cfg, grid, base)
    res = equivalence_batch(fs, eos, float(cfg.get("p_max", 200.0)))
    tails = [verify_tail_bound(f, eos, float(cfg.get("p_max", 200.0))) for f in fs]
    names = FAMILY_NAMES if cfg.get("batch", "family") == "family" else [str(i) for i in range(len(fs))]
    return {
        "alpha": eos.alpha,
        "C1": eos.C1,
        "C2": eos.C2,
        "C3": res["C3"],
        "C4": res["C4"],
        "spread": res["spread"],
        "functions": [
            {"name": nm, "orlicz": r.orlicz, "gnorm": r.gnorm, "ratio": r.ratio, "diverged": r.diverged}
            for nm, r in zip(names, res["reports"])
        ],
        "tail_bound": [
            {"name": nm, "ok": t.ok, "chebyshev_margin": t.chebyshev_margin, "theorem_margin": t.theorem_margin}
            for nm, t in zip(names, tails)
        ],
    }


def cmd_solve1(cfg, grid, out, base):
    if "q" not in cfg:
        raise ConfigError("config needs 'q'")
    rep = {}
    if "g" in cfg:
        g = _function(cfg["g"], grid, base)
        prob = FirstOrderProblem.build(cfg["q"], g)
        sol = solve_first_order(prob, float(cfg.get("tol", 1e-10)))
        save_csv(sol.y, out / "solve1_y.csv")
        rep.update(
            m_hat=prob.m_hat,
            M_hat=prob.M_hat,
            iterations=sol.iterations,
            contraction_rate=sol.contraction_rate,
            contraction_bound=sol.contraction_bound,
            fixed_point_residual=sol.fixed_point_residual,
            residual_inf=sol.residual_inf,
        )
    if "batch" in cfg or "g" not in cfg:
        N = NFunction.from_config(cfg.get("n_function", {"family": "power", "p": 2}))
        rep["wellposed"] = wellposed_report_1(cfg["q"], _batch(cfg, grid, base), N)
    return rep


def cmd_geometry(cfg, grid, out, base):
    geo = geometry(cfg.get("q0", "1"), grid)
    save_csv(geo.d, out / "geometry_d.csv")
    return {"A": geo.A, "B": geo.B, "nu_B": geo.nuB, "kappa_B": geo.kappaB}


def cmd_green(cfg, grid, out, base):
    q0 = cfg.get("q0", "1")
    geo = geometry(q0, grid)
    G = green_build(q0, grid)
    _save_table(out / "green_diagonal.csv", ["x", "rho", "d"], zip(grid.nodes, G.rho(), geo.d.values))
    rep = {"wronskian": G.wronskian, "wronskian_drift": G.wronskian_drift, "A": geo.A, "B": geo.B}
    rep["bounds"] = verify_green_bounds(G, geo)
    if "g" in cfg:
        y = solve_linear(G, _function(cfg["g"], grid, base), q0)
        save_csv(y, out / "green_solution.csv")
    return rep


def cmd_solve2(cfg, grid, out, base):
    q0 = cfg.get("q0", "1")
    pot = Potential.build(q0, cfg.get("v", "0"), grid)
    geo = geometry(q0, grid)
    G = green_build(q0, grid)
    rep = {"v_norm": pot.v_norm, "A": geo.A, "B": geo.B, "kappa_B": geo.kappaB, "nu_B": geo.nuB}
    if "g" in cfg:
        sol = solve_nonlinear(pot, G, geo, _function(cfg["g"], grid, base), float(cfg.get("tol", 1e-10)))
        save_csv(sol.y, out / "solve2_y.csv")
        rep.update(
            iterations=sol.iterations,
            contraction_rate=sol.contraction_rate,
            contraction_bound=sol.contraction_bound,
            residual_inf=sol.residual_inf,
            nu_condition=sol.nu_condition,
        )
    if "batch" in cfg:
        if "n_function" in cfg:
            N = NFunction.from_config(cfg["n_function"])
        else:
            N = NFunction.eos(_eos_from(cfg))
        rep["wellposed"] = wellposed_report_2(pot, G, geo, _batch(cfg, grid, base), N, float(cfg.get("beta", 2.0)))
    return rep


def cmd_illposed(cfg, grid, out, base):
    keys = ("beta", "delta", "alpha", "q0", "radii", "cell", "probe", "inner")
    ic = IllposedConfig(**{k: cfg[k] for k in keys if k in cfg})
    rep = demonstrate(ic)
    lower = ic.beta - ic.delta
    _save_table(
        out / "illposed.csv",
        ["radius", f"norm_L{ic.beta:g}", f"norm_L{lower:g}"],
        [(r.radius, r.norm_beta, r.norm_lower) for r in rep.rows],
    )
    return rep.to_dict()


def cmd_verify_all(cfg, grid, out, base):
    """Small versions of every suite in one report."""
    fam = test_family(grid)
    suites = {}
    lux = []
    for p in (1.0, 2.0, 4.0):
        N = NFunction.power(p)
        lux += [abs(luxemburg_norm(f, N) - lp_norm(f, p)) / lp_norm(f, p) for f in fam]
    suites["luxemburg_lp"] = {"max_rel_error": max(lux), "pass": max(lux) <= 1e-6}

    b = smooth_bump(grid, 0.0, 1.0, 3.0)
    s1 = solve_first_order(FirstOrderProblem.build("y + 0.5*min(1, max(-1, y))", b))
    suites["first_order"] = {
        "iterations": s1.iterations,
        "rate": s1.contraction_rate,
        "bound": s1.contraction_bound,
        "pass": s1.contraction_rate <= s1.contraction_bound + 0.05,
    }

    pot = Potential.build("1", "0.05*sin(y)", grid)
    geo = geometry("1", grid)
    G = green_build("1", grid)
    s2 = solve_nonlinear(pot, G, geo, b)
    bounds = verify_green_bounds(G, geo)
    suites["second_order"] = {
        "iterations": s2.iterations,
        "rate": s2.contraction_rate,
        "certificate": s2.contraction_bound,
        "residual_inf": s2.residual_inf,
        "green_bounds": bounds,
        "pass": s2.contraction_bound < 1 and bounds["diagonal_lower_margin"] > 0 and bounds["upper_envelope_margin"] > 0,
    }

    ip = demonstrate(IllposedConfig())
    bi, li = ip.beta_increments, ip.lower_increments
    suites["illposed"] = {
        "beta_increments": bi,
        "lower_increments": li,
        "probe_ratio": ip.probe_ratio,
        "pass": all(v > 0 for v in li) and all(b2 < b1 for b1, b2 in zip(bi, bi[1:])),
    }

    eq = {}
    for name, alpha, phi in (
        ("power2", 1.0, PhiFunction.power(2)),
        ("power1", 2.0, PhiFunction.power(1)),
        ("logpower1", 1.0, PhiFunction.log_power(1)),
    ):
        res = equivalence_batch(fam, build_eos(alpha, phi))
        eq[name] = {"C3": res["C3"], "C4": res["C4"]}
    eos1 = build_eos(1.0, PhiFunction.power(1))
    tails = [verify_tail_bound(f, eos1).ok for f in fam]
    suites["moment_equivalence"] = {"constants": eq, "tail_bound_all_ok": all(tails), "pass": all(tails)}
    return {"suites": suites, "all_pass": all(s["pass"] for s in suites.values())}


HANDLERS = {
    "norm": cmd_norm,
    "eos-equivalence": cmd_eos_equivalence,
    "solve1": cmd_solve1,
    "geometry": cmd_geometry,
    "green": cmd_green,
    "solve2": cmd_solve2,
    "illposed": cmd_illposed,
    "verify-all": cmd_verify_all,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orlicz-ode", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="JSON config (defaults apply when omitted)")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory")
    ap.add_argument("--grid-radius", type=float)
    ap.add_argument("--grid-nodes", type=int)
    return ap


def _fail(code: int, reason: str) -> int:
    sys.stderr.write(json.dumps({"exit": code, "reason": reason}) + "\n")
    return code


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        return _fail(2, "usage error")
    try:
        raw = args.config.read_bytes() if args.config else b"{}"
        try:
            cfg = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        grid_cfg = dict(cfg.get("grid", {}))
        if args.grid_radius is not None:
            grid_cfg["radius"] = args.grid_radius
        if args.grid_nodes is not None:
            grid_cfg["nodes"] = args.grid_nodes
        cfg["grid"] = grid_cfg
        grid = _grid(cfg)
        args.out.mkdir(parents=True, exist_ok=True)
        base = args.config.parent if args.config else Path(".")
        with np.errstate(over="ignore", under="ignore"):
            body = HANDLERS[args.command](cfg, grid, args.out, base)
        report = {
            "command": args.command,
            "config_sha256": hashlib.sha256(raw).hexdigest(),
            "grid": {"radius": grid.truncation_radius, "nodes": grid.n},
            "result": body,
        }
        (args.out / f"{args.command}.json").write_text(dumps(report))
    except HypothesisViolation as exc:
        return _fail(1, str(exc))
    except ConfigError as exc:
        return _fail(2, str(exc))
    except (NumericFailure, ArithmeticError) as exc:
        return _fail(3, str(exc))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        return _fail(2, f"{type(exc).__name__}: {exc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
