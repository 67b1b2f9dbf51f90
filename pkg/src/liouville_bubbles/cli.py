"""Command-line entry point: ``liouville-bubbles <command> --config run.json --out dir``."""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .ansatz import assemble, in_configuration_space, make_config, star_norm
from .config import RunConfig
from .energy import ReducedEnergy, maximize, sweep_header
from .errors import ConfigurationError, NumericalError
from .full_solver import continuation, reconstruct_v
from .io import write_field_csv, write_json, write_rows_csv
from .reduction import asymptotic_contraction, solve_inner, solve_inner_newton
from .spectral import check_assumption_a
from . import verification

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 1, 2, 3


def _xi(cfg: RunConfig, p):
    """Bubble points from the config, else the reduced-energy maximiser."""
    if p.m == 0:
        return np.zeros((0, 2)), None
    if cfg["xi"] is not None:
        return np.array(cfg["xi"], dtype=float), None
    lc = cfg["landscape"]
    rep = maximize(p, ReducedEnergy(p, cfg["corrections"], cfg["residual"], cfg["inner"]["method"]),
                   radius_factor=lc["radius_factor"], phase=lc["phase"], barrier=lc["barrier"],
                   warm_start=lc["warm_start"], maxfev=lc["maxfev"])
    return np.array(rep.xi_t, dtype=float), rep


def _guarded_config(cfg, p, xi, force):
    config = make_config(p, xi)
    if not force:
        config.check_resolution(cfg["resolution_factor"])
    return config


def cmd_eigen(cfg, out, args):
    p = cfg.problem()
    rep = check_assumption_a(p.op, p.eig, p.q, p.d)
    write_field_csv(out / "phi1.csv", p.grid, p.eig.phi, "phi1")
    summary = {"lambda1": p.eig.lam, "phi1_q": p.phi_q, "iterations": p.eig.iterations,
               "assumption_a": {**rep.__dict__, "holds": rep.holds}}
    print(f"lambda1 = {p.eig.lam:.8g}  phi1(q) = {p.phi_q:.6g}  assumption (A): {rep.holds}")
    return summary


def cmd_green(cfg, out, args):
    p = cfg.problem()
    points = [tuple(p.q)] + ([tuple(x) for x in cfg["xi"]] if cfg["xi"] else [])
    rows = []
    for k, y in enumerate(points):
        H = p.green.add(y)
        write_field_csv(out / f"H_{k}.csv", p.grid, H, "H")
        rows.append({"pole": list(y), "robin": p.green.robin(y)})
    print("  ".join(f"R({y[0]:.4g},{y[1]:.4g}) = {r['robin']:.8g}" for y, r in zip(points, rows)))
    return {"poles": rows, "rho": p.bg.rho}


def cmd_ansatz(cfg, out, args):
    p = cfg.problem()
    xi, rep = _xi(cfg, p)
    config = _guarded_config(cfg, p, xi, args.force)
    f = assemble(config, cfg["corrections"])
    ok, margins = in_configuration_space(p, xi)
    write_field_csv(out / "U.csv", p.grid, f.U, "U")
    write_field_csv(out / "E.csv", p.grid, f.E, "E")
    s = star_norm(f.E, config)
    print(f"t = {p.t:g}  m = {p.m}  star_norm(E) = {s:.6g}  admissible = {ok}")
    return {"scales": config.scales(), "star_norm_E": s, "admissible": ok, "margins": margins,
            "clamped": f.clamped, "landscape": rep.summary() if rep else None}


def cmd_residual(cfg, out, args):
    rows = []
    for t in cfg.t_values:
        p = cfg.problem(t)
        xi = np.array(cfg["xi"], dtype=float) if cfg["xi"] else np.zeros((0, 2))
        config = _guarded_config(cfg, p, xi, args.force)
        f = assemble(config, cfg["corrections"])
        rows.append({"t": t, "core0": config.core0, "cores": config.cores.tolist(),
                     "star_norm_E": star_norm(f.E, config), "star_norm_E_discrete": star_norm(f.E_discrete, config),
                     "sup_E": float(np.abs(f.E).max())})
        write_field_csv(out / f"E_{len(rows) - 1}.csv", p.grid, f.E, "E")
        print(f"t = {t:g}  star_norm(E) = {rows[-1]['star_norm_E']:.6g}  "
              f"(discrete Laplacian: {rows[-1]['star_norm_E_discrete']:.6g})")
    write_rows_csv(out / "residual.csv", ["t", "core0", "star_norm_E", "star_norm_E_discrete", "sup_E"],
                   [[r["t"], r["core0"], r["star_norm_E"], r["star_norm_E_discrete"], r["sup_E"]] for r in rows])
    return {"sweep": rows}


def cmd_reduce(cfg, out, args):
    p = cfg.problem()
    xi, rep = _xi(cfg, p)
    config = _guarded_config(cfg, p, xi, args.force)
    f = assemble(config, cfg["corrections"])
    inner = cfg["inner"]
    solver = solve_inner_newton if inner["method"] == "newton" else solve_inner
    s = solver(f, cfg["residual"], tol=inner["tol"], maxiter=inner["maxiter"])
    write_field_csv(out / "phi.csv", p.grid, s.phi, "phi")
    summary = {**s.report(), "xi": xi.tolist()}
    if inner["method"] == "fixed_point":
        summary["contraction"] = asymptotic_contraction(s)
    print(f"inner converged = {s.converged}  |phi|_inf = {s.phi_sup:.6g}  "
          f"max|c| = {summary['c_max']:.3g}  iterations = {len(s.log)}")
    if not s.converged:
        raise NumericalError("inner problem did not converge", summary)
    return summary


def cmd_landscape(cfg, out, args):
    p = cfg.problem()
    if p.m < 1:
        raise ConfigurationError("m: landscape needs m >= 1")
    _, rep = _xi(cfg.__class__.from_dict({**cfg.to_dict(), "xi": None}), p)
    if not args.force:
        make_config(p, rep.xi_t).check_resolution(cfg["resolution_factor"])
    write_rows_csv(out / "samples.csv", sweep_header(p.m), [s.row() for s in rep.samples])
    print(f"xi_t = {rep.xi_t}  F_t = {rep.value:.10g}  interior = {rep.interior}  max|c| = {rep.c_max}")
    return rep.summary()


def cmd_solve(cfg, out, args):
    p = cfg.problem()
    fixed = np.array(cfg["xi"], dtype=float) if cfg["xi"] else None

    def xi_of_t(pt):
        if pt.m == 0:
            return np.zeros((0, 2))
        return fixed if fixed is not None else _xi(cfg, pt)[0]

    nk = cfg["newton"]
    reports = continuation(cfg.t_values, p, xi_of_t, resolution_factor=cfg["resolution_factor"],
                           force=args.force, tol=nk["tol"], maxiter=nk["maxiter"])
    rows = []
    failed = False
    for k, entry in enumerate(reports):
        if "report" not in entry:
            if entry["error"].startswith("ResolutionError"):
                raise ConfigurationError(f"t = {entry['t']:g}: {entry['error']}")
            rows.append(entry)
            failed = True
            print(f"t = {entry['t']:g}  FAILED  {entry['error']}")
            continue
        r = entry["report"]
        write_field_csv(out / f"u_{k}.csv", p.grid, r.u, "u")
        write_field_csv(out / f"v_{k}.csv", p.grid, reconstruct_v(r.u, p.at(t=entry["t"])), "v")
        rows.append(r.summary())
        failed |= not r.converged
        print(f"t = {entry['t']:g}  converged = {r.converged}  mass = {r.mass:.6g}  "
              f"predicted = {r.mass_pred:.6g}  rel.err = {r.mass_rel_error:.3%}  peaks = {r.bubbles['count']}")
    if failed:
        raise NumericalError("Newton refinement failed for some t", {"sweep": rows})
    return {"sweep": rows}


def _run_check(name):
    res, timing = verification.run_checks([name])
    return res[0], timing[name]


def cmd_verify(cfg, out, args):
    names = verification.SUITES.get(args.suite)
    if names is None:
        raise ConfigurationError(f"suite: unknown suite {args.suite!r}; choose from {sorted(verification.SUITES)}")
    if args.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            done = dict(zip(names, pool.map(_run_check, names)))
    else:
        done = {n: _run_check(n) for n in names}
    results = [done[n][0] for n in names]
    write_json(out / "timing.json", {n: done[n][1] for n in names})
    for r in results:
        print(r.line())
    passed = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return {"suite": args.suite, "passed": passed, "checks": [r.to_dict() for r in results]}


COMMANDS = {
    "eigen": cmd_eigen,
    "green": cmd_green,
    "ansatz": cmd_ansatz,
    "residual": cmd_residual,
    "reduce": cmd_reduce,
    "landscape": cmd_landscape,
    "solve": cmd_solve,
    "verify": cmd_verify,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="liouville-bubbles", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="JSON run configuration (defaults apply when omitted)")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for verify")
    ap.add_argument("--force", action="store_true", help="skip the bubble-core resolution guard")
    ap.add_argument("--suite", default="acceptance", help=f"verify suite: {', '.join(sorted(verification.SUITES))}")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigurationError("--jobs: must be >= 1")
        cfg = RunConfig.load(args.config) if args.config else RunConfig.from_dict({})
        args.out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command](cfg, args.out, args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", {})
        if args.out.is_dir():
            write_json(args.out / f"{args.command}_failure.json",
                       {"command": args.command, "error": str(exc),
                        "diagnostics": {k: v for k, v in diag.items() if not isinstance(v, np.ndarray)}})
        return EXIT_NUMERICAL
    write_json(args.out / f"{args.command}.json", {"command": args.command, "config": cfg.to_dict(), **summary})
    if args.command == "verify" and not summary["passed"]:
        return EXIT_ACCEPTANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
