"""Newton refinement of the full discrete problem, mass and bubble diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.ndimage import maximum_filter

from .ansatz import EXP_CLAMP, ProblemParams, assemble, make_config
from .errors import ConfigurationError, NumericalError
from .reduction import solve_inner, solve_inner_newton


def residual(u, params: ProblemParams):
    """Discrete F(u)/(a w) = -Delta_h u - |x-q|^{2 alpha} k e^{-t phi_1} e^u (zero trace)."""
    op = params.op
    return op.K @ u / op.mass - params.weight0 * np.exp(np.minimum(u, EXP_CLAMP))


@dataclass
class SolveReport:
    u: np.ndarray
    converged: bool
    log: list
    mass: float
    mass_pred: float
    mass_rel_error: float
    bubbles: dict
    distance_to_init: float
    t: float
    m: int
    extra: dict = field(default_factory=dict)

    def summary(self):
        return {
            "t": self.t,
            "m": self.m,
            "converged": self.converged,
            "iterations": len(self.log),
            "final_residual": self.log[-1]["residual"] if self.log else None,
            "newton_log": self.log,
            "mass": self.mass,
            "mass_pred": self.mass_pred,
            "mass_rel_error": self.mass_rel_error,
            "bubbles": self.bubbles,
            "distance_to_init": self.distance_to_init,
            **self.extra,
        }


def newton_solve(u_init, params: ProblemParams, tol=1e-8, maxiter=30, min_damping=1.0 / 1024) -> SolveReport:
    """Damped Newton on K u = a w |x-q|^{2a} k e^{-t phi_1} e^u with backtracking on ||F||_inf."""
    p = params
    op = p.op
    u = np.array(u_init, dtype=float)
    F = residual(u, p)
    norm = float(np.abs(F).max())
    log = [{"iteration": 0, "residual": norm, "damping": None, "ratio": None}]
    for k in range(1, maxiter + 1):
        if norm <= tol:
            break
        J = (op.K - sp.diags(op.mass * p.weight0 * np.exp(np.minimum(u, EXP_CLAMP)))).tocsc()
        try:
            du = spla.splu(J, permc_spec="MMD_AT_PLUS_A").solve(-F * op.mass)
        except RuntimeError as exc:
            raise NumericalError("Newton Jacobian is singular", {"iteration": k, "log": log, "u": u}) from exc
        lam = 1.0
        while True:
            un = u + lam * du
            Fn = residual(un, p)
            nn = float(np.abs(Fn).max())
            if np.isfinite(nn) and nn < norm:
                break
            lam *= 0.5
            if lam < min_damping:
                raise NumericalError("Newton line search stagnated", {"iteration": k, "log": log, "u": u})
        log.append({"iteration": k, "residual": nn, "damping": lam, "ratio": nn / norm**2})
        u, F, norm = un, Fn, nn
    converged = norm <= tol
    mass, pred, rel = mass_check(u, p)
    return SolveReport(
        u=u,
        converged=converged,
        log=log,
        mass=mass,
        mass_pred=pred,
        mass_rel_error=rel,
        bubbles=bubble_report(u, p),
        distance_to_init=float(np.abs(u - np.asarray(u_init)).max()),
        t=p.t,
        m=p.m,
    )


def reconstruct_v(u, params: ProblemParams):
    """v = u - t phi_1 - (alpha/2) G(., q) - rho; NaN at the node nearest q when alpha != 0."""
    p = params
    grid = p.grid
    try:
        Hq = p.green.H(p.q)
    except ConfigurationError as exc:
        raise ConfigurationError("Green table lacks the pole q") from exc
    r = np.hypot(grid.x - p.q[0], grid.y - p.q[1])
    v = np.asarray(u, dtype=float) - p.t * p.eig.phi - p.bg.rho
    if p.alpha != 0.0:
        pole = grid.nearest_node(p.q)
        r = r.copy()
        r[pole] = 1.0
        G = -4.0 * np.log(r) + Hq
        v = v - 0.5 * p.alpha * G
        v[pole] = np.nan
    return v


def mass_check(u, params: ProblemParams):
    """(M, 8 pi (m+1+alpha) a(q) phi_1(q), relative error) with M from the weight identity."""
    p = params
    M = float(np.sum(p.op.mass * p.weight0 * np.exp(np.minimum(u, EXP_CLAMP))))
    pred = 8.0 * np.pi * (p.m + 1 + p.alpha) * p.a_q * p.phi_q
    return M, float(pred), float(abs(M - pred) / pred)


def find_peaks(u, grid, threshold=0.5):
    """Strict 8-neighbour local maxima above ``threshold`` times the global max."""
    u = np.asarray(u, dtype=float)
    top = float(u.max()) if u.size else 0.0
    if top <= 0:
        return []
    A = np.full((grid.nx + 1, grid.ny + 1), -np.inf)
    A[grid.i, grid.j] = u
    footprint = np.ones((3, 3), dtype=bool)
    footprint[1, 1] = False
    neigh = maximum_filter(A, footprint=footprint, mode="constant", cval=-np.inf)
    mask = (A > neigh) & (A > threshold * top)
    ii, jj = np.nonzero(mask)
    nodes = grid.index[ii, jj]
    order = np.argsort(-u[nodes], kind="stable")
    return [int(nodes[k]) for k in order]


def bubble_report(u, params: ProblemParams, threshold=0.5):
    p = params
    grid = p.grid
    nodes = find_peaks(u, grid, threshold)
    pts = np.array([[grid.x[k], grid.y[k]] for k in nodes]).reshape(-1, 2)
    q = np.asarray(p.q)
    dq = np.hypot(*(pts - q).T) if len(nodes) else np.zeros(0)
    pair = []
    for a in range(len(nodes)):
        for b in range(a + 1, len(nodes)):
            pair.append(float(np.hypot(*(pts[a] - pts[b]))))
    spacing = p.t ** (-p.beta)
    count_ok = len(nodes) == p.m + 1
    return {
        "count": len(nodes),
        "expected": p.m + 1,
        "locations": pts.tolist(),
        "heights": [float(u[k]) for k in nodes],
        "pairwise_distances": pair,
        "distance_to_q": dq.tolist(),
        "spacing_bound": spacing,
        "spacing_ok": bool(all(d > spacing for d in pair)),
        "inside_ball": bool(np.all(dq <= p.d)),
        "q_peak_within_2h": bool(len(nodes) > 0 and dq.min() <= 2.0 * grid.h),
        "flat": len(nodes) == 0,
        "structure_ok": bool(count_ok and all(d > spacing for d in pair) and np.all(dq <= p.d)),
    }


def ansatz_seed(params: ProblemParams, xi, corrections="exact", inner="newton", residual_mode="discrete"):
    """U(xi) + phi(xi); phi is dropped (and flagged) if the inner problem fails."""
    fields = assemble(make_config(params, xi), corrections)
    info = {"inner_converged": False, "phi_sup": None}
    phi = np.zeros_like(fields.U)
    try:
        solve = solve_inner_newton if inner == "newton" else solve_inner
        r = solve(fields, residual_mode)
        if r.converged:
            phi = r.phi
            info = {"inner_converged": True, "phi_sup": r.phi_sup, "c": r.c.tolist()}
    except NumericalError as exc:
        info["inner_error"] = str(exc)
    return fields, phi, info


def continuation(t_grid, params: ProblemParams, xi_of_t=None, seed="transport", resolution_factor=4.0,
                 force=False, **newton_kw):
    """Sequential solves along increasing t.

    ``xi_of_t(params_t)`` supplies the bubble points for each step (default:
    none for m = 0).  With ``seed="transport"`` step k starts from
    U(t_k) + (u*_{k-1} - U_{k-1}); ``seed="ansatz"`` always starts from U + phi.
    A failed step is recorded and the next one reseeds from the ansatz.
    """
    reports = []
    prev = None  # (u*, U) of the last accepted step
    for t in t_grid:
        pt = params.at(t=float(t))
        entry = {"t": float(t)}
        try:
            xi = xi_of_t(pt) if xi_of_t is not None else np.zeros((0, 2))
            config = make_config(pt, xi)
            if not force:
                config.check_resolution(resolution_factor)
            fields, phi, info = ansatz_seed(pt, xi)
            if seed == "transport" and prev is not None:
                u0 = fields.U + (prev[0] - prev[1])
                info["seed"] = "transport"
            else:
                u0 = fields.U + phi
                info["seed"] = "ansatz"
            rep = newton_solve(u0, pt, **newton_kw)
            rep.extra.update(info)
            rep.extra["xi"] = np.asarray(xi).tolist()
            rep.extra["sup_u_minus_ansatz"] = float(np.abs(rep.u - fields.U - phi).max())
            entry["report"] = rep
            prev = (rep.u, fields.U) if rep.converged else None
        except (NumericalError, ConfigurationError) as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            prev = None
        reports.append(entry)
    return reports
