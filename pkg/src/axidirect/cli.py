"""Command line front end.

Every subcommand writes CSV files into --out and, with --svg, a diagnostic
plot.  Settings come from built-in defaults, then an optional --config JSON
file, then explicit flags.  Module errors end the run with exit status 1 and
a JSON error object on stderr.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import boundary as bd
from . import example2d as ex
from . import hardy, minmax, pde
from . import shooting as sh
from .errors import AxiError, InvalidInput
from .geometry import DirectionField, MultipoleSpec
from .hardy import WeightParams
from .io import write_csv, write_grid, write_json
from .plot import svg_plot


def floats(s):
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    if isinstance(s, (int, float)):
        return [float(s)]
    return [float(v) for v in str(s).split(",") if v.strip()]


def complexes(s):
    if isinstance(s, (list, tuple)):
        return [complex(v) for v in s]
    return [complex(v.replace(" ", "")) for v in str(s).split(",") if v.strip()]


def ints(s):
    return [int(v) for v in floats(s)]


# name: (parser, default, help)
COMMON = {
    "out": (str, ".", "output directory"),
    "svg": (bool, False, "also write an SVG plot"),
}

OPTIONS = {
    "minmax-analytic": {
        "alpha": (float, 0.39, "weight exponent alpha"),
        "ratios": (floats, "0,1e-6,1e-4,1e-2", "comma-separated b0/b1 values"),
        "gamma_from": (float, 0.0, "first gamma"),
        "gamma_to": (float, 2.0, "last gamma"),
        "gamma_step": (float, 0.05, "gamma step"),
    },
    "minmax-window": {
        "alpha": (float, 0.39, "weight exponent alpha"),
        "d": (float, 0.1, "weight parameter d"),
        "e": (float, 1.2, "weight parameter e"),
        "B": (float, 0.0, "interval ratio B"),
        "gamma_from": (float, 0.05, "first gamma"),
        "gamma_to": (float, 1.6, "last gamma"),
        "gamma_step": (float, 0.05, "gamma step"),
    },
    "shoot": {
        "alpha": (float, 0.39, "weight exponent alpha"),
        "gamma": (floats, "0.7", "comma-separated gamma values"),
        "d": (float, 0.1, "weight parameter d"),
        "e": (float, 1.2, "weight parameter e"),
        "b0": (float, 1e-3, "left end of the interval"),
        "btilde": (floats, "25,50,100", "comma-separated right ends"),
        "reduced": (bool, False, "reduced system on [ratio, 1] against the closed form"),
        "ratios": (floats, "1e-6,1e-4,1e-2", "ratios for the reduced table"),
        "n_scan": (int, 200, "determinant scan points"),
    },
    "hardy-verify": {
        "n": (int, 1000, "number of random bumps"),
        "seed": (int, 0, "random seed"),
    },
    "solve": {
        "direction": (str, "", "CSV phi,d_zeta,d_rho of the direction on r = 1"),
        "multipole": (floats, "-1", "multipole coefficients c_n from n = delta - 2 (used without --direction)"),
        "delta": (int, 3, "order of the first multipole coefficient plus 2"),
        "rho": (int, 2, "rotation number on r = 1"),
        "rho_hat": (int, 2, "rotation number on r = R"),
        "zeros": (complexes, "", "comma-separated zeros in the upper half plane, e.g. 1.7j"),
        "outer": (str, "", "CSV direction on r = R for the bounded problem"),
        "R": (float, 8.0, "outer radius"),
        "grid": (ints, "128,256", "cells n_r,n_phi"),
        "tol": (float, 1e-8, "Picard tolerance"),
        "max_iter": (int, 200, "Picard iteration cap"),
        "omega0": (float, 1.0, "initial relaxation"),
    },
    "shift-zero": {
        "multipole": (floats, "-1,0,-2", "multipole coefficients of the boundary direction"),
        "delta": (int, 3, "order of the first coefficient plus 2"),
        "rho": (int, 4, "rotation number on r = 1"),
        "rho_hat": (int, 2, "rotation number at infinity of the moved-zero solutions"),
        "core": (complexes, "", "zeros shared by all three solutions"),
        "zero_a": (complex, "0.5+1.6j", "zero of the first solution"),
        "zero_b": (complex, "-0.4+2j", "zero of the second solution"),
        "zeta_s": (float, 2.0, "axis point for the new zero"),
        "mode": (str, "expel", "expel or second-axis"),
        "zeta_s2": (float, -2.5, "second axis point (second-axis mode)"),
        "R": (float, 8.0, "outer radius"),
        "grid": (ints, "64,128", "cells n_r,n_phi"),
    },
    "trace-2d": {
        "from": (float, -0.9, "first lambda"),
        "to": (float, 0.9, "last lambda"),
        "step": (float, 0.05, "lambda step"),
    },
    "verify-all": {
        "criteria": (ints, "1,2,3,4,5,6,7,8,9,10", "which criteria to run"),
    },
}


def _grid(a, b, step):
    n = int(round((b - a) / step))
    return np.round(a + step * np.arange(n + 1), 12)


def _out(cfg, name):
    d = Path(cfg["out"])
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def cmd_minmax_analytic(cfg):
    gammas = _grid(cfg["gamma_from"], cfg["gamma_to"], cfg["gamma_step"])
    a = cfg["alpha"]
    rows, series = [], []
    for ratio in cfg["ratios"]:
        B = ratio ** (1 + a)
        mus = []
        for g in gammas:
            try:
                mu = minmax.mu_analytic(a, float(g), B)
            except AxiError:
                mu = float("nan")
            mus.append(mu)
            rows.append((ratio, float(g), B, mu))
        series.append((f"b0/b1 = {ratio:g}", gammas, mus))
    path = write_csv(_out(cfg, "minmax_analytic.csv"), ["ratio", "gamma", "B", "mu0"], rows)
    if cfg["svg"]:
        svg_plot(_out(cfg, "minmax_analytic.svg"), series, "gamma", "mu0")
    return [path]


def cmd_minmax_window(cfg):
    gammas = _grid(cfg["gamma_from"], cfg["gamma_to"], cfg["gamma_step"])
    reps = minmax.window_sweep(cfg["alpha"], cfg["d"], cfg["e"], gammas, cfg["B"])
    path = minmax.write_reports(_out(cfg, "minmax_window.csv"), reps)
    if cfg["svg"]:
        svg_plot(_out(cfg, "minmax_window.svg"),
                 [("LB", gammas, [r.LB for r in reps]), ("CF", gammas, [r.CF for r in reps])],
                 "gamma", "value")
    return [path]


def cmd_shoot(cfg):
    if cfg["reduced"]:
        rows = sh.reduced_table(cfg["alpha"], cfg["gamma"], cfg["ratios"], cfg["n_scan"])
        path = sh.write_reduced_table(_out(cfg, "shoot_reduced.csv"), rows)
        if cfg["svg"]:
            series = []
            for ratio in cfg["ratios"]:
                sel = [r for r in rows if r[1] == ratio]
                series.append((f"numeric {ratio:g}", [r[0] for r in sel], [r[2] for r in sel]))
            svg_plot(_out(cfg, "shoot_reduced.svg"), series, "gamma", "mu_min", scatter=True)
        return [path]
    items = []
    for g in cfg["gamma"]:
        w = WeightParams(cfg["alpha"], g, cfg["d"], cfg["e"])
        for bt in cfg["btilde"]:
            p = sh.ShootingProblem(w, cfg["b0"], bt)
            items.append((p, sh.find_eigenvalues(p, n_scan=cfg["n_scan"])))
    path = sh.write_results(_out(cfg, "shoot.csv"), items)
    if cfg["svg"]:
        svg_plot(_out(cfg, "shoot.svg"),
                 [("mu_min", [p.btilde for p, _ in items], [r.mu_min for _, r in items])],
                 "btilde", "mu_min", scatter=True)
    return [path]


def cmd_hardy_verify(cfg):
    res = hardy.random_bump_suite(cfg["n"], seed=cfg["seed"])
    rows = []
    for name, reps in res.items():
        for k, r in enumerate(reps):
            rows.append((name, k, r.lhs, r.rhs, r.ratio, r.holds and r.converged))
    path = write_csv(_out(cfg, "hardy.csv"), ["inequality", "index", "lhs", "rhs", "ratio", "holds"], rows)
    if cfg["svg"]:
        svg_plot(_out(cfg, "hardy.svg"),
                 [(name, np.arange(len(reps)), [r.ratio for r in reps]) for name, reps in res.items()],
                 "bump", "lhs / rhs", scatter=True)
    bad = sum(not row[5] for row in rows)
    if bad:
        raise HardyViolation(f"{bad} of {len(rows)} checks failed")
    return [path]


class HardyViolation(AxiError):
    code = "inequality_violated"


def _direction(cfg):
    if cfg.get("direction"):
        return DirectionField.from_csv(cfg["direction"])
    return DirectionField.from_multipole(MultipoleSpec(cfg["delta"], cfg["multipole"]), 720)


def _write_solution(cfg, sol, stem):
    g = sol.grid
    R, P = g.mesh()
    rows = zip(R.ravel(), P.ravel(), sol.b_zeta.ravel(), sol.b_rho.ravel(), sol.q.ravel(), sol.p.cells.ravel())
    paths = [write_csv(_out(cfg, f"{stem}.csv"), ["r", "phi", "b_zeta", "b_rho", "q", "p"], rows)]
    paths.append(write_grid(_out(cfg, f"{stem}_abs.axgd"), np.hypot(sol.b_zeta, sol.b_rho)))
    if sol.amplitude is not None:
        paths.append(write_csv(_out(cfg, f"{stem}_amplitude.csv"), ["phi", "amplitude"],
                               zip(g.phi, sol.amplitude)))
    return paths


def cmd_solve(cfg):
    D = _direction(cfg)
    zc = bd.ZeroConfig(cfg["rho"], cfg["rho_hat"], cfg["zeros"])
    outer = DirectionField.from_csv(cfg["outer"]) if cfg["outer"] else None
    est = pde.DirectionProblemSolver(cfg["R"], tuple(cfg["grid"]), cfg["tol"], cfg["max_iter"],
                                     cfg["omega0"], exterior=outer is None)
    sol = est.fit(D, zc, outer).solution_
    paths = _write_solution(cfg, sol, "field")
    summary = {"iterations": sol.state.iterations, "energy": sol.state.energy, "curl": sol.p.curl,
               "amplitude_min": float(np.min(sol.amplitude)),
               "zeros": [[float(r), float(p), w] for r, p, w in
                         pde.field_zeros(sol.b_zeta, sol.b_rho, sol.grid)]}
    if getattr(sol, "fit", None) is not None:
        summary["multipole"] = [float(c) for c in sol.fit.coeffs]
    write_json(_out(cfg, "summary.json"), summary)
    paths.append(_out(cfg, "summary.json"))
    if cfg["svg"]:
        svg_plot(_out(cfg, "field_amplitude.svg"), [("a", sol.grid.phi, sol.amplitude)], "phi", "amplitude")
    return paths


def cmd_shift_zero(cfg):
    D = DirectionField.from_multipole(MultipoleSpec(cfg["delta"], cfg["multipole"]), 720)
    core = cfg["core"]
    rho, rh = cfg["rho"], cfg["rho_hat"]
    kw = dict(R=cfg["R"], grid=tuple(cfg["grid"]))
    sols = [pde.solve_direction_problem(D, bd.ZeroConfig(rho, rh, core + [cfg["zero_a"]]), **kw),
            pde.solve_direction_problem(D, bd.ZeroConfig(rho, rh, core + [cfg["zero_b"]]), **kw),
            pde.solve_direction_problem(D, bd.ZeroConfig(rho, rh + 2, core), **kw)]
    comb = pde.shift_zero_to_axis(sols, cfg["zeta_s"], cfg["mode"], cfg["zeta_s2"])
    g = comb.grid
    R, P = g.mesh()
    paths = [write_csv(_out(cfg, "shift_field.csv"), ["r", "phi", "b_zeta", "b_rho"],
                       zip(R.ravel(), P.ravel(), comb.b_zeta.ravel(), comb.b_rho.ravel()))]
    paths.append(write_csv(_out(cfg, "shift_weights.csv"), ["part", "weight"],
                           zip(["moved_a", "moved_b", "higher_order"], comb.weights)))
    delta, _ = comb.fit.decay_order(1e-3)
    summary = {"mode": cfg["mode"], "weights": [float(w) for w in comb.weights],
               "decay_order": delta, "axis_zeros": [float(z) for z in comb.axis_zeros()],
               "boundary_min_abs": comb.boundary_min_abs(),
               "multipole": [float(c) for c in comb.fit.coeffs]}
    write_json(_out(cfg, "shift_summary.json"), summary)
    paths.append(_out(cfg, "shift_summary.json"))
    if cfg["svg"]:
        z = np.linspace(g.r_min, g.r_max, 400)
        svg_plot(_out(cfg, "shift_axis.svg"),
                 [("zeta > 0", z, comb.axis_b_zeta(z)), ("zeta < 0", -z, comb.axis_b_zeta(-z))],
                 "zeta", "B_zeta on the axis")
    return paths


def cmd_trace_2d(cfg):
    lams = _grid(cfg["from"], cfg["to"], cfg["step"])
    rows = ex.trace_zero_path(lams)
    path = ex.write_trajectory(_out(cfg, "trajectory.csv"), rows)
    if cfg["svg"]:
        svg_plot(_out(cfg, "trajectory.svg"),
                 [("r0", [r.lam for r in rows], [r.r0 for r in rows]),
                  ("phi0", [r.lam for r in rows], [r.phi0 for r in rows])],
                 "lambda", "zero position", scatter=True)
    return [path]


def cmd_verify_all(cfg):
    from . import acceptance
    res = acceptance.run_all(cfg["criteria"], echo=print)
    path = write_csv(_out(cfg, "acceptance.csv"), ["criterion", "name", "passed", "detail", "seconds"],
                     [(r.number, r.name, r.passed, r.detail, r.seconds) for r in res])
    if cfg["svg"]:
        svg_plot(_out(cfg, "acceptance.svg"),
                 [("seconds", [r.number for r in res], [r.seconds for r in res])],
                 "criterion", "seconds", scatter=True)
    if not all(r.passed for r in res):
        return [path], 1
    return [path]


COMMANDS = {
    "minmax-analytic": cmd_minmax_analytic,
    "minmax-window": cmd_minmax_window,
    "shoot": cmd_shoot,
    "hardy-verify": cmd_hardy_verify,
    "solve": cmd_solve,
    "shift-zero": cmd_shift_zero,
    "trace-2d": cmd_trace_2d,
    "verify-all": cmd_verify_all,
}


def build_parser():
    p = argparse.ArgumentParser(prog="axidirect", description="Axisymmetric direction problem toolkit.")
    sub = p.add_subparsers(dest="command")
    for name, opts in OPTIONS.items():
        s = sub.add_parser(name)
        s.add_argument("--config", default=None, help="JSON file with settings")
        for key, (kind, default, text) in {**COMMON, **opts}.items():
            flag = "--" + key.replace("_", "-")
            if kind is bool:
                s.add_argument(flag, dest=key, action="store_true", default=None, help=text)
            else:
                s.add_argument(flag, dest=key, default=None, help=f"{text} (default {default})")
    return p


def resolve(command, args):
    """Defaults, then the --config file, then explicit flags; values parsed and checked."""
    opts = {**COMMON, **OPTIONS[command]}
    raw = {k: v[1] for k, v in opts.items()}
    if args.get("config"):
        with open(args["config"]) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise InvalidInput("config file must hold a JSON object")
        unknown = sorted(set(data) - set(opts))
        if unknown:
            raise InvalidInput(f"unknown config keys: {', '.join(unknown)}")
        raw.update(data)
    raw.update({k: v for k, v in args.items() if k in opts and v is not None})
    cfg = {}
    for k, (kind, _, _) in opts.items():
        v = raw[k]
        try:
            if kind is bool:
                cfg[k] = bool(v)
            elif kind is str:
                cfg[k] = str(v)
            elif kind is complex:
                cfg[k] = complex(str(v).replace(" ", ""))
            else:
                cfg[k] = kind(v)
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"bad value for {k}: {v!r}") from exc
    return cfg


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    if command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        cfg = resolve(command, args)
        out = COMMANDS[command](cfg)
    except AxiError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "io_error", "message": str(exc)}), file=sys.stderr)
        return 1
    status = 0
    if isinstance(out, tuple):
        out, status = out
    for p in out:
        print(p)
    return status


if __name__ == "__main__":
    sys.exit(main())
