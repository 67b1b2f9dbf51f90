"""Named verification checks and suites, shared by the ``verify`` command and the tests.

Every check builds its own setup, so a suite result depends only on the code
and the check definitions.  Wall-clock timings are returned separately.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import jn_zeros

from .ansatz import (
    BubbleConfig,
    assemble,
    build_problem,
    corrections,
    in_configuration_space,
    integrate_profile_mass,
    make_config,
    profile,
    star_norm,
    star_weight,
    validate_alpha,
)
from .discretization import Coefficient, Domain, assemble_operator, build_grid
from .energy import ReducedEnergy, energy_Jt, expansion_Jt, initial_polygon, maximize, radial_critical_point, ring
from .errors import BubbleError, ConfigurationError
from .full_solver import ansatz_seed, newton_solve
from .green import GreenTable
from .reduction import (
    ProjectedSolver,
    asymptotic_contraction,
    build_basis,
    solve_inner,
    z_dilation,
    z_translation,
)
from .spectral import first_eigenpair

UNIT_DISC = Domain.disc(1.0, (0.0, 0.0))
ONE = Coefficient.constant(1.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    criterion: str
    metrics: dict = field(default_factory=dict)

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.criterion}"

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "criterion": self.criterion, "metrics": self.metrics}


_MEMO: dict = {}


def memo(key, build):
    if key not in _MEMO:
        _MEMO[key] = build()
    return _MEMO[key]


def loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def strictly_decreasing(values):
    return bool(all(b < a for a, b in zip(values, values[1:])))


# ---------------------------------------------------------------- shared setups


def disc_problem(alpha, m, n, t, coefficient=ONE, d=0.6):
    key = ("disc", alpha, m, n, repr(coefficient), d)
    base = memo(key, lambda: build_problem(UNIT_DISC, coefficient, n, alpha, q=(0.0, 0.0), d=d, t=t, m=m))
    return base.at(t=float(t))


def landscape_at(alpha, m, n, t):
    """(report, energy) of the reduced-energy maximisation; the energy keeps its warm start."""
    def run():
        p = disc_problem(alpha, m, n, t)
        F = ReducedEnergy(p)
        return maximize(p, F), F
    return memo(("landscape", alpha, m, n, t), run)


# ---------------------------------------------------------------- acceptance checks

EIGEN_N = 256


def check_eigen():
    out = {}
    ok = True
    oracles = {
        "disc": (UNIT_DISC, float(jn_zeros(0, 1)[0] ** 2)),
        "square": (Domain.rectangle((0.0, 0.0), (1.0, 1.0)), 2.0 * np.pi**2),
    }
    for name, (dom, exact) in oracles.items():
        t0 = time.perf_counter()
        op = assemble_operator(build_grid(dom, EIGEN_N), ONE)
        eig = first_eigenpair(op)
        elapsed = time.perf_counter() - t0
        rel = abs(eig.lam - exact) / exact
        out[name] = {"lambda1": eig.lam, "exact": exact, "rel_error": rel, "under_60s": elapsed < 60.0}
        ok &= rel <= 5e-3 and elapsed < 60.0
    return CheckResult("eigen_accuracy", ok, "lambda_1 within 0.5% of j01^2 (disc) and 2 pi^2 (square), n=256, < 60 s",
                       out)


def check_green():
    op = assemble_operator(build_grid(UNIT_DISC, 256), ONE)
    table = GreenTable(op)
    H0 = table.add((0.0, 0.0))
    g = op.grid
    inner = np.hypot(g.x, g.y) <= 0.9
    sup_H = float(np.abs(H0[inner]).max())

    coef = Coefficient.exp_x1(1.0)
    op2 = assemble_operator(build_grid(UNIT_DISC, 256), coef)
    t2 = GreenTable(op2)
    rng = np.random.default_rng(20240611)
    pairs = []
    while len(pairs) < 20:
        x, y = rng.uniform(-0.6, 0.6, size=(2, 2))
        if np.hypot(*x) < 0.6 and np.hypot(*y) < 0.6 and np.hypot(*(x - y)) > 0.15:
            pairs.append((x, y))
    errs = []
    for x, y in pairs:
        t2.add(x)
        t2.add(y)
        ax = float(coef(np.array([x[0]]), np.array([x[1]]))[0])
        ay = float(coef(np.array([y[0]]), np.array([y[1]]))[0])
        gxy = ax * t2.value(x, y)
        gyx = ay * t2.value(y, x)
        errs.append(abs(gxy - gyx) / max(abs(gxy), abs(gyx)))
    ok = sup_H <= 2e-2 and max(errs) <= 1e-2
    return CheckResult(
        "green_correctness", ok,
        "sup|H(.,0)| <= 2e-2 on |x|<=0.9 (a=1); weighted symmetry within 1% on 20 pairs (a=e^x1)",
        {"sup_H0": sup_H, "symmetry_max_rel": max(errs), "symmetry_median_rel": float(np.median(errs))},
    )


def check_bubble_masses():
    out = {}
    ok = True
    for alpha in (-0.5, 0.5, 1.5):
        r = integrate_profile_mass(alpha, n=256, core=0.1)
        out[str(alpha)] = r
        ok &= r["rel_error_q"] <= 0.02 and r["rel_error_xi"] <= 0.02
    return CheckResult("bubble_masses", ok, "quadrature masses 8 pi (1+alpha) and 8 pi within 2%", out)


# the bump case reaches the asymptotic regime only at larger t
LEMMA_SWEEPS = {
    "a=1": {"coefficient": ONE, "n": 128, "ts": (4.0, 5.0, 6.0, 7.0, 8.0)},
    "gaussian_bump": {"coefficient": Coefficient.gaussian_bump(0.5, (0.0, 0.0), 0.5), "n": 256,
                      "ts": (10.0, 11.0, 12.0, 13.0, 14.0)},
}


def correction_gap_sweep(alpha, m, n, ts, coefficient, xi=None):
    rows = []
    for t in ts:
        p = disc_problem(alpha, m, n, t, coefficient)
        c = make_config(p, xi if xi is not None else np.zeros((0, 2)))
        ex, _ = corrections(c, "exact")
        le, _ = corrections(c, "leading")
        rows.append({"t": t, "core0": c.core0, "cores": c.cores.tolist(),
                     "gap": [float(np.abs(a - b).max()) for a, b in zip(ex, le)],
                     "sigma": p.sigma_value})
    return rows


def check_lemma21():
    out = {}
    ok = True
    for label, cfg in LEMMA_SWEEPS.items():
        rows = correction_gap_sweep(0.5, 1, cfg["n"], cfg["ts"], cfg["coefficient"], xi=np.array([[0.4, 0.0]]))
        sigma = rows[0]["sigma"]
        s0 = loglog_slope([r["core0"] for r in rows], [r["gap"][0] for r in rows])
        s1 = loglog_slope([r["cores"][0] for r in rows], [r["gap"][1] for r in rows])
        out[label] = {"rows": rows, "slope_H0": s0, "slope_H1": s1, "threshold": 0.8 * sigma}
        ok &= s0 >= 0.8 * sigma and s1 >= 0.8 * sigma
    return CheckResult("lemma21_rate", ok,
                       "log-slope of sup|exact - leading| vs core width >= 0.8 sigma for H_0 and H_1", out)


RESIDUAL_SWEEPS = {
    "m0": {"alpha": 0.5, "m": 0, "n": 256, "ts": (5.0, 6.0, 7.0), "xi": None},
    "m1": {"alpha": 0.5, "m": 1, "n": 320, "ts": (9.0, 10.0, 11.0), "xi": [[0.45, 0.0]]},
}


def check_residual_decay():
    out = {}
    ok = True
    for label, cfg in RESIDUAL_SWEEPS.items():
        rows = []
        for t in cfg["ts"]:
            p = disc_problem(cfg["alpha"], cfg["m"], cfg["n"], t)
            c = make_config(p, cfg["xi"] if cfg["xi"] else np.zeros((0, 2)))
            f = assemble(c)
            g = p.grid
            near = np.hypot(g.x - p.q[0], g.y - p.q[1]) <= p.d
            rows.append({"t": t, "scale": float(max([c.core0, *c.cores])), "star_E": star_norm(f.E, c),
                         "star_E_ball": star_norm(f.E, c, near), "sigma": p.sigma_value})
        sigma = rows[0]["sigma"]
        slope = loglog_slope([r["scale"] for r in rows], [r["star_E"] for r in rows])
        slope_ball = loglog_slope([r["scale"] for r in rows], [r["star_E_ball"] for r in rows])
        dec = strictly_decreasing([r["star_E"] for r in rows])
        out[label] = {"rows": rows, "slope": slope, "slope_ball": slope_ball, "threshold": 0.7 * sigma,
                      "decreasing": dec}
        ok &= dec and slope >= 0.7 * sigma
    return CheckResult("residual_decay", ok,
                       "star_norm(E) decreasing along t with log-slope vs core width >= 0.7 sigma (m = 0, 1)", out)


PROJECTED = {"alpha": 0.5, "m": 1, "n": 256, "ts": (4.0, 5.0, 6.0, 7.0, 8.0), "xi": [[0.4, 0.0]]}


def smooth_field(grid, seed, modes=4):
    rng = np.random.default_rng(seed)
    f = np.zeros(grid.size)
    for _ in range(modes):
        kx, ky = rng.uniform(-4, 4, size=2)
        ph = rng.uniform(0, 2 * np.pi)
        f += rng.normal() * np.cos(kx * grid.x + ky * grid.y + ph)
    return f


def check_projected():
    cfg = PROJECTED
    rows = []
    cres = lin = zero = 0.0
    exact_c = None
    for t in cfg["ts"]:
        p = disc_problem(cfg["alpha"], cfg["m"], cfg["n"], t)
        c = make_config(p, cfg["xi"])
        f = assemble(c)
        T = ProjectedSolver(c, f.W)
        g = p.grid
        h1 = smooth_field(g, 1)
        h2 = smooth_field(g, 2)
        s1, s2 = T.solve(h1), T.solve(h2)
        s12 = T.solve(0.3 * h1 - 1.7 * h2)
        scale = max(s12.phi_sup, 1e-300)
        lin = max(lin, float(np.abs(s12.phi - (0.3 * s1.phi - 1.7 * s2.phi)).max() / scale),
                  float(np.abs(s12.c - (0.3 * s1.c - 1.7 * s2.c)).max() / max(np.abs(s12.c).max(), 1e-300)))
        s0 = T.solve(np.zeros(g.size))
        zero = max(zero, s0.phi_sup, float(np.abs(s0.c).max()))
        cres = max(cres, s1.constraint_residual, s2.constraint_residual, s12.constraint_residual)
        # forcing equal to a basis direction is absorbed by the multiplier
        B = build_basis(c)
        sb = T.solve(B.chiZ[0, 0] / (p.op.a * c.eps0**2))
        exact_c = max(exact_c or 0.0, float(abs(sb.c[0, 0] + 1.0)), float(abs(sb.c[0, 1])), sb.phi_sup)
        rows.append({"t": t, "ratio": s1.ratio, "ratio2": s2.ratio, "h_star": s1.h_star, "phi_sup": s1.phi_sup})
    ratios = [0.5 * (r["ratio"] + r["ratio2"]) for r in rows]
    growth = loglog_slope(cfg["ts"], ratios)
    ok = cres <= 1e-10 and zero == 0.0 and lin <= 1e-8 and growth <= 0.0 and exact_c <= 1e-8
    return CheckResult(
        "projected_solver", ok,
        "constraints <= 1e-10, h=0 -> 0, linearity <= 1e-8, ratio ||phi||/(t||h||_*) no growth over t in [4, 8] (m=1)",
        {"constraint_residual": cres, "zero_solution": zero, "linearity": lin, "basis_forcing_error": exact_c,
         "rows": rows, "ratio_growth_slope": growth},
    )


# Bubble points: the landscape maximiser where available, otherwise a symmetric
# polygon of the given radius near the critical radius of the reduced energy,
# where the inner problem is solvable at desk scale.  R0 is lowered for the
# wide alpha = -0.5 pair, whose cutoff supports overlap at the default.
INNER_MATRIX = [
    {"m": 0, "alpha": 0.5, "n": 256, "t": 7.0, "xi": None},
    {"m": 0, "alpha": -0.5, "n": 336, "t": 3.0, "xi": None},
    {"m": 1, "alpha": 0.5, "n": 400, "t": 12.0, "xi": "landscape"},
    {"m": 1, "alpha": -0.5, "n": 448, "t": 6.0, "xi": 0.5},
    {"m": 2, "alpha": 0.5, "n": 640, "t": 15.0, "xi": 0.43},
    {"m": 2, "alpha": -0.5, "n": 416, "t": 8.0, "xi": 0.5, "R0": 6.0},
]
INNER_SWEEP = {"m": 0, "alpha": 0.5, "n": 256, "ts": (6.0, 7.0, 8.0)}


def polygon(p, radius):
    ang = 2.0 * np.pi * np.arange(p.m) / p.m
    return np.c_[p.q[0] + radius * np.cos(ang), p.q[1] + radius * np.sin(ang)]


def matrix_xi(entry, p):
    if entry["xi"] is None:
        return np.zeros((0, 2))
    if entry["xi"] == "landscape":
        return np.array(landscape_at(entry["alpha"], entry["m"], entry["n"], entry["t"])[0].xi_t)
    return polygon(p, entry["xi"])


def check_inner():
    rows = []
    ok = True
    for entry in INNER_MATRIX:
        p = disc_problem(entry["alpha"], entry["m"], entry["n"], entry["t"])
        if "R0" in entry:
            p = p.at(R0=entry["R0"])
        row = dict(entry)
        try:
            xi = matrix_xi(entry, p)
            row["admissible"] = in_configuration_space(p, xi)[0]
            c = make_config(p, xi)
            c.check_resolution()
            s = solve_inner(assemble(c), maxiter=300)
            rate = asymptotic_contraction(s)
            row.update({"xi": xi.tolist(), "converged": s.converged, "iterations": len(s.log), "rate": rate,
                        "phi_sup": s.phi_sup, "final_relax": s.log[-1]["relax"]})
            ok &= bool(s.converged and rate < 1.0 and row["admissible"])
        except BubbleError as exc:
            row.update({"xi": entry["xi"], "converged": False, "error": f"{type(exc).__name__}: {exc}"})
            ok = False
        rows.append(row)
    sw = INNER_SWEEP
    sweep = []
    for t in sw["ts"]:
        p = disc_problem(sw["alpha"], sw["m"], sw["n"], t)
        c = make_config(p)
        s = solve_inner(assemble(c), maxiter=300)
        sweep.append({"t": t, "phi_sup": s.phi_sup, "core0": c.core0, "converged": s.converged})
    p = disc_problem(sw["alpha"], sw["m"], sw["n"], sw["ts"][0])
    predicted = min(p.sigma_value, 2.0 * (p.alpha - p.alpha_hat_value))
    slope = loglog_slope([r["core0"] for r in sweep], [r["phi_sup"] / r["t"] for r in sweep])
    dec = strictly_decreasing([r["phi_sup"] for r in sweep])
    ok &= dec and slope >= 0.7 * predicted
    return CheckResult(
        "inner_problem", ok,
        "fixed point converges with contraction < 1 on the (m <= 2, alpha = +-0.5) matrix; ||phi|| decreasing in t",
        {"matrix": rows, "sweep": sweep, "slope": slope, "predicted_exponent": predicted},
    )


EXPANSION_RING = {"alpha": 0.5, "n": 320, "t": 10.0, "radius": 0.4, "count": 16,
                  "coefficient": Coefficient.gaussian_bump(-0.3, (0.0, 0.0), 1.2, 0.6)}


def check_expansion():
    cfg = EXPANSION_RING
    p = disc_problem(cfg["alpha"], 1, cfg["n"], cfg["t"], cfg["coefficient"])
    F = ReducedEnergy(p)
    rows = []
    for xi in ring(p, cfg["radius"], cfg["count"]):
        s = F.evaluate(xi, with_phi=False)
        rows.append({"xi": s.xi[0], "J_U": s.J_U, "expansion": s.expansion, "admissible": s.admissible})
    J = np.array([r["J_U"] for r in rows])
    X = np.array([r["expansion"] for r in rows])
    ratio = float(np.var(J - X) / np.var(X))
    ok = ratio <= 0.1 and all(r["admissible"] for r in rows)
    return CheckResult("expansion_ring", ok, "Var[J_t(U) - expansion] <= 0.1 Var[expansion] on an admissible ring (m=1)",
                       {"variance_ratio": ratio, "rows": rows})


LANDSCAPE = {"alpha": 0.5, "m": 1, "n": 400, "t": 12.0}


def check_landscape():
    cfg = LANDSCAPE
    rep, F = landscape_at(cfg["alpha"], cfg["m"], cfg["n"], cfg["t"])
    p = disc_problem(cfg["alpha"], cfg["m"], cfg["n"], cfg["t"])
    rel = [mg["slack"] / mg["scale"] for mg in rep.margins]
    xi_t = np.array(rep.xi_t)
    q = np.asarray(p.q)
    xi_p = q + 0.9 * (xi_t - q)
    sp = F.evaluate(xi_p, True)
    c_t = rep.c_max if rep.c_max is not None else np.inf
    c_p = sp.c_max if sp.c_max is not None else np.nan
    evaluated = [s.F for s in rep.samples if s.F is not None]
    ascent = rep.value >= max(evaluated) - 1e-9 if evaluated else False
    ok = bool(min(rel) > 1e-3 and c_t <= 0.2 * c_p)
    return CheckResult(
        "maximizer_matching", ok,
        "xi_t interior (all margins > 1e-3 of scale) and max|c(xi_t)| <= 0.2 max|c(perturbed 10%)|",
        {"xi_t": rep.xi_t, "relative_margins": rel, "c_max": c_t, "c_max_perturbed": c_p,
         "F_t": rep.value, "F_perturbed": sp.F, "ascent_contract": bool(ascent), "summary": rep.summary()},
    )


MASS_SWEEPS = {
    "m0": {"alpha": 0.5, "m": 0, "n": 256, "ts": (5.0, 6.0, 7.0)},
    "m1": {"alpha": 0.5, "m": 1, "n": 560, "ts": (12.0, 12.5, 13.0), "bracket": (0.35, 0.55), "angle": np.pi / 4},
}


def mass_xi(cfg, p):
    """Bubble point where the reduced problem is critical (c = 0 on a ray; a = 1 disc is rotation invariant)."""
    if cfg["m"] == 0:
        return np.zeros((0, 2))
    return radial_critical_point(p, *cfg["bracket"], angle=cfg["angle"])


def mass_run(label):
    cfg = MASS_SWEEPS[label]

    def run():
        rows = []
        for t in cfg["ts"]:
            p = disc_problem(cfg["alpha"], cfg["m"], cfg["n"], t)
            row = {"t": t}
            try:
                xi = mass_xi(cfg, p)
                config = make_config(p, xi)
                row.update({"xi": xi.tolist(),
                            "core_min_over_h": float(min([config.core0, *config.cores]) / p.grid.h)})
                config.check_resolution()
                fields, phi, info = ansatz_seed(p, xi)
                rep = newton_solve(fields.U + phi, p)
                row.update({"converged": rep.converged, "iterations": len(rep.log) - 1, "mass": rep.mass,
                            "mass_pred": rep.mass_pred, "rel_error": rep.mass_rel_error, "bubbles": rep.bubbles,
                            "inner_converged": info["inner_converged"],
                            "newton_ratios": [e["ratio"] for e in rep.log[1:]],
                            "sup_u_minus_seed": rep.distance_to_init})
            except BubbleError as exc:
                row.update({"converged": False, "error": f"{type(exc).__name__}: {exc}"})
            rows.append(row)
        return rows
    return memo(("mass", label), run)


def check_mass():
    out = {}
    ok = True
    for label in MASS_SWEEPS:
        rows = mass_run(label)
        conv = all(r.get("converged") for r in rows)
        errs = [r.get("rel_error", np.inf) for r in rows]
        dec = strictly_decreasing(errs)
        last = errs[-1]
        out[label] = {"rows": rows, "all_converged": conv, "decreasing": dec, "final_rel_error": last}
        ok &= conv and dec and last <= 0.10
    return CheckResult("mass_quantization", ok,
                       "Newton from U + phi converges; mass within 10% at largest t, error strictly decreasing (m=0,1)",
                       out)


def check_structure():
    rows = mass_run("m1")
    ok = bool(rows) and all(r.get("converged") and r["bubbles"]["count"] == 2 and r["bubbles"]["spacing_ok"]
                            and r["bubbles"]["inside_ball"] for r in rows)
    return CheckResult("bubble_structure", ok, "accepted m=1 solutions: 2 peaks, spacing > t^-beta, inside B_d(q)",
                       {"rows": [{"t": r["t"], "bubbles": r.get("bubbles"), "converged": r.get("converged")}
                                 for r in rows]})


DETERMINISM_CHECKS = ["trivial_formulas", "green_correctness", "bubble_masses"]


def check_determinism():
    from .io import dumps
    runs = [dumps([r.to_dict() for r in run_checks(DETERMINISM_CHECKS)[0]]) for _ in range(2)]
    return CheckResult("determinism", runs[0] == runs[1],
                       "byte-identical suite JSON across re-runs of " + ", ".join(DETERMINISM_CHECKS),
                       {"bytes": len(runs[0])})


# ---------------------------------------------------------------- trivial checks


def check_trivial_formulas():
    out = {}
    p = build_problem(UNIT_DISC, ONE, 64, 0.0, q=(0.0, 0.0), d=0.6, t=4.0, m=0)
    c = make_config(p)
    out["mu0_disc"] = abs(c.mu0 - 1.0 / (2.0 * np.sqrt(2.0)))
    # u_0 at q
    a1 = 1.0
    u_q = float(profile(c, 0, np.array([0.0]), np.array([0.0]))[0])
    ref = np.log(8 * c.mu0**2 * a1**2 / (c.k_q * c.eps0**4 * c.mu0**4))
    out["u0_at_q"] = abs(u_q - ref)
    out["expansion_m0"] = abs(expansion_Jt([], p) - 8 * np.pi * p.t * p.a_q)
    z = np.array([0.0])
    out["z_at_0"] = float(abs(z_translation(z, z, 1)[0]) + abs(z_dilation(z, z)[0] + 1.0))
    p3 = p.at(t=100.0, m=3)
    poly = initial_polygon(p3)
    out["polygon"] = float(np.abs(np.hypot(*poly.T) - 0.1).max()
                           + np.abs(np.mod(np.arctan2(poly[:, 1], poly[:, 0]), 2 * np.pi)
                                    - np.array([0, 2 * np.pi / 3, 4 * np.pi / 3])).max())
    w = star_weight(c)
    out["star_norm_weight"] = abs(star_norm(w / c.eps0**2, c) - 1.0) + abs(star_norm(2 * w / c.eps0**2, c) - 2.0)
    out["star_norm_zero"] = star_norm(np.zeros(p.grid.size), c)
    out["vacuous_m0"] = 0.0 if in_configuration_space(p, [])[0] else 1.0
    out["energy_u0"] = abs(energy_Jt(np.zeros(p.grid.size), p) + float(np.sum(p.op.mass * p.weight0)))
    try:
        validate_alpha(2.0)
        out["alpha_integer_rejected"] = 1.0
    except ConfigurationError:
        out["alpha_integer_rejected"] = 0.0
    ok = all(v <= 1e-9 for v in out.values())
    return CheckResult("trivial_formulas", ok, "closed-form instantiations and definitional identities", out)


CHECKS = {
    "trivial_formulas": check_trivial_formulas,
    "eigen_accuracy": check_eigen,
    "green_correctness": check_green,
    "bubble_masses": check_bubble_masses,
    "lemma21_rate": check_lemma21,
    "residual_decay": check_residual_decay,
    "projected_solver": check_projected,
    "inner_problem": check_inner,
    "expansion_ring": check_expansion,
    "maximizer_matching": check_landscape,
    "mass_quantization": check_mass,
    "bubble_structure": check_structure,
    "determinism": check_determinism,
}

ACCEPTANCE = [
    "eigen_accuracy", "green_correctness", "bubble_masses", "lemma21_rate", "residual_decay", "projected_solver",
    "inner_problem", "expansion_ring", "maximizer_matching", "mass_quantization", "bubble_structure", "determinism",
]

SUITES = {
    "trivial": ["trivial_formulas"],
    "fast": ["trivial_formulas", "eigen_accuracy", "green_correctness", "bubble_masses", "lemma21_rate"],
    "acceptance": ACCEPTANCE,
    **{name: [name] for name in CHECKS},
}


def run_checks(names):
    results, timings = [], {}
    for name in names:
        if name not in CHECKS:
            raise ConfigurationError(f"unknown check {name!r}")
        t0 = time.perf_counter()
        results.append(CHECKS[name]())
        timings[name] = time.perf_counter() - t0
    return results, timings


def run_suite(suite):
    if suite not in SUITES:
        raise ConfigurationError(f"suite: unknown suite {suite!r}; choose from {sorted(SUITES)}")
    return run_checks(SUITES[suite])
