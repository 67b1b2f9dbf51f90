"""Energy J_t, its closed-form expansion, the reduced energy F_t and its maximization."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .ansatz import EXP_CLAMP, ProblemParams, assemble, in_configuration_space, make_config
from .errors import ConfigurationError, NumericalError
from .reduction import solve_inner, solve_inner_newton


def energy_Jt(u, params: ProblemParams, trace=0.0) -> float:
    """J_t(u) = 1/2 int a|grad u|^2 - int a k |x-q|^{2 alpha} e^{-t phi_1} e^u."""
    u = np.asarray(u, dtype=float)
    if np.any(u > EXP_CLAMP):
        i = int(np.argmax(u))
        g = params.grid
        raise NumericalError("overflow in e^u", {"x": float(g.x[i]), "y": float(g.y[i]), "u": float(u[i])})
    op = params.op
    return float(op.energy(u, trace) - np.sum(op.mass * params.weight0 * np.exp(u)))


def expansion_Jt(xi, params: ProblemParams) -> float:
    """Leading terms of J_t(U(xi)); the O(1) remainder is not included."""
    p = params
    xi = np.asarray(xi, dtype=float).reshape(-1, 2) if np.size(xi) else np.zeros((0, 2))
    q = np.asarray(p.q)
    value = 8.0 * np.pi * (1.0 + p.alpha) * p.t * p.a_q
    if xi.shape[0] == 0:
        return float(value)
    a = p.a_at(xi)
    phi = np.atleast_1d(p.phi_at(xi))
    dq = np.hypot(*(xi - q).T)
    if np.any(dq == 0):
        raise ConfigurationError("bubble point coincides with q")
    value += 8.0 * np.pi * p.t * np.sum(a * phi)
    value += 16.0 * np.pi * (2.0 + p.alpha) * np.sum(a * np.log(dq))
    for i in range(xi.shape[0]):
        for j in range(xi.shape[0]):
            if i != j:
                dij = np.hypot(*(xi[i] - xi[j]))
                if dij == 0:
                    raise ConfigurationError("coincident bubble points")
                value += 16.0 * np.pi * a[i] * np.log(dij)
    return float(value)


@dataclass
class EnergySample:
    xi: list
    J_U: float
    F: float | None
    expansion: float
    c: list | None
    c_max: float | None
    phi_sup: float | None
    inner_converged: bool | None
    admissible: bool
    margins: list

    def row(self):
        flat = [float(v) for pt in self.xi for v in pt]
        nan = float("nan")
        return flat + [self.J_U, nan if self.F is None else self.F, self.expansion,
                       nan if self.c_max is None else self.c_max,
                       min((mg["slack"] / mg["scale"] for mg in self.margins), default=nan)]


class ReducedEnergy:
    """F_t(xi) = J_t(U(xi) + phi(xi)) with per-xi memoisation on a 1e-6 lattice."""

    def __init__(self, params: ProblemParams, corrections="exact", residual="discrete", inner="newton",
                 inner_tol=1e-10, inner_maxiter=50, warm=True):
        self.params = params
        self.corrections = corrections
        self.residual = residual
        self.inner = inner
        self.inner_tol = inner_tol
        self.inner_maxiter = inner_maxiter
        self.warm = warm
        self.cache: dict = {}
        self.order: list = []
        self._last_phi = None

    def key(self, xi):
        xi = np.asarray(xi, dtype=float).reshape(-1, 2)
        return tuple(np.round(xi.ravel(), 6).tolist())

    def fields(self, xi):
        return assemble(make_config(self.params, xi), self.corrections)

    def _inner(self, fields):
        if self.inner != "newton":
            return solve_inner(fields, self.residual, tol=self.inner_tol, maxiter=self.inner_maxiter)
        if self.warm and self._last_phi is not None:
            try:
                r = solve_inner_newton(fields, self.residual, tol=self.inner_tol, maxiter=self.inner_maxiter,
                                       phi0=self._last_phi)
                if r.converged:
                    self._last_phi = r.phi
                    return r
            except NumericalError:
                pass
        r = solve_inner_newton(fields, self.residual, tol=self.inner_tol, maxiter=self.inner_maxiter)
        if r.converged:
            self._last_phi = r.phi
        return r

    def evaluate(self, xi, with_phi=True) -> EnergySample:
        k = self.key(xi)
        s = self.cache.get(k)
        if s is not None and (not with_phi or s.inner_converged is not None):
            return s
        xi = np.array(k, dtype=float).reshape(-1, 2)
        ok, margins = in_configuration_space(self.params, xi)
        f = self.fields(xi)
        J_U = energy_Jt(f.U, self.params, f.U_trace)
        F = c = cmax = phis = conv = None
        if with_phi:
            try:
                r = self._inner(f)
                conv = bool(r.converged)
                F = energy_Jt(f.U + r.phi, self.params, f.U_trace) if conv else None
                c = r.c.tolist()
                cmax = float(np.abs(r.c).max()) if r.c.size else 0.0
                phis = r.phi_sup
            except NumericalError:
                conv = False
        s = EnergySample(xi.tolist(), J_U, F, expansion_Jt(xi, self.params), c, cmax, phis, conv, ok, margins)
        if k not in self.cache:
            self.order.append(k)
        self.cache[k] = s
        return s

    def __call__(self, xi, with_phi=True):
        s = self.evaluate(xi, with_phi)
        return s.F if with_phi else s.J_U

    def samples(self):
        return [self.cache[k] for k in self.order]


def initial_polygon(params: ProblemParams, radius_factor=1.0, phase=0.0):
    """xi_i^0 = q + radius_factor t^{-1/2} (cos, sin)(phase + 2 pi i / m)."""
    p = params
    if p.m < 1:
        raise ConfigurationError("initial polygon needs m >= 1")
    r = radius_factor * p.t**-0.5
    if r > p.d:
        raise ConfigurationError(f"polygon radius {r:.3g} exceeds d = {p.d}; increase t or d")
    ang = phase + 2.0 * np.pi * np.arange(p.m) / p.m
    return np.c_[p.q[0] + r * np.cos(ang), p.q[1] + r * np.sin(ang)]


@dataclass
class EnergyReport:
    xi0: list
    xi_t: list
    value: float  # F_t(xi_t), or J_t(U) when the inner problem failed there
    value_kind: str
    value_initial: float | None
    margins: list
    interior: bool
    pinned: bool
    c: list | None
    c_max: float | None
    stages: list = field(default_factory=list)
    samples: list = field(default_factory=list)

    def summary(self):
        return {
            "xi0": self.xi0,
            "xi_t": self.xi_t,
            "value": self.value,
            "value_kind": self.value_kind,
            "value_initial": self.value_initial,
            "margins": self.margins,
            "interior": self.interior,
            "pinned": self.pinned,
            "c": self.c,
            "c_max": self.c_max,
            "stages": self.stages,
            "evaluations": len(self.samples),
        }


def _barrier(margins, weight):
    total = 0.0
    for mg in margins:
        s = mg["slack"] / mg["scale"]
        if s <= 0:
            return None
        total += np.log(s)
    return weight * total


def maximize(
    params: ProblemParams,
    energy: ReducedEnergy | None = None,
    radius_factor=1.0,
    phase=0.0,
    barrier=1e-4,
    xatol_factor=1e-4,
    warm_start=True,
    maxfev=400,
) -> EnergyReport:
    """Nelder-Mead ascent of F_t with a log barrier on the admissible set.

    With ``warm_start`` a first simplex run maximises J_t(U(xi)), which is
    defined everywhere, and the second run on F_t starts from its result;
    at desk scale the inner problem has no solution far from the maximiser.
    """
    p = params
    if p.m < 1:
        raise ConfigurationError("maximize needs m >= 1")
    F = energy if energy is not None else ReducedEnergy(p)
    xi0 = initial_polygon(p, radius_factor, phase)
    scale = p.t**-0.5
    xatol = xatol_factor * scale
    stages = []

    def objective(with_phi):
        def f(z):
            xi = z.reshape(-1, 2)
            ok, margins = in_configuration_space(p, xi)
            b = _barrier(margins, barrier)
            if b is None:
                return np.inf
            try:
                v = F(xi, with_phi)
            except (NumericalError, ConfigurationError):
                return np.inf
            if v is None:
                return np.inf
            return -(v + b)
        return f

    def simplex(z0, size):
        n = z0.size
        sim = np.repeat(z0[None, :], n + 1, axis=0)
        for k in range(n):
            sim[k + 1, k] += size
        return sim

    z = xi0.ravel().copy()
    if warm_start:
        res = minimize(objective(False), z, method="Nelder-Mead",
                       options={"initial_simplex": simplex(z, 0.1 * scale), "xatol": xatol, "fatol": 1e-10,
                                "maxfev": maxfev})
        stages.append({"objective": "J_t(U)", "nfev": int(res.nfev), "value": float(-res.fun),
                       "xi": res.x.reshape(-1, 2).tolist()})
        z = res.x
    if np.isfinite(objective(True)(z)):
        res = minimize(objective(True), z, method="Nelder-Mead",
                       options={"initial_simplex": simplex(z, 0.02 * scale if warm_start else 0.1 * scale),
                                "xatol": xatol, "fatol": 1e-10, "maxfev": maxfev})
        stages.append({"objective": "F_t", "nfev": int(res.nfev), "value": float(-res.fun),
                       "xi": res.x.reshape(-1, 2).tolist()})
        z = res.x
    else:
        stages.append({"objective": "F_t", "nfev": 1, "skipped": "inner problem unsolved at the starting point"})
    xi_t = z.reshape(-1, 2)
    best = F.evaluate(xi_t, True)
    init = F.evaluate(xi0, True)
    ok, margins = in_configuration_space(p, xi_t)
    rel = [mg["slack"] / mg["scale"] for mg in margins]
    pinned = bool(min(rel) < 1e-3) if rel else False
    return EnergyReport(
        xi0=xi0.tolist(),
        xi_t=best.xi,
        value=best.F if best.F is not None else best.J_U,
        value_kind="F_t" if best.F is not None else "J_t(U)",
        value_initial=init.F,
        margins=margins,
        interior=bool(ok and not pinned),
        pinned=pinned,
        c=best.c,
        c_max=best.c_max,
        stages=stages,
        samples=F.samples(),
    )


def sweep_header(m):
    cols = []
    for i in range(m):
        cols += [f"xi{i}_x", f"xi{i}_y"]
    return cols + ["J_U", "F", "expansion", "c_max", "min_rel_margin"]


def landscape_sweep(params: ProblemParams, points, with_phi=False, energy: ReducedEnergy | None = None):
    """Evaluate J_t(U), optionally F_t, and the expansion at each configuration."""
    F = energy if energy is not None else ReducedEnergy(params)
    return [F.evaluate(xi, with_phi) for xi in points]


def ring(params: ProblemParams, radius, count=16, phase=0.0):
    """m = 1 configurations on a circle around q."""
    ang = phase + 2.0 * np.pi * np.arange(count) / count
    return [np.array([[params.q[0] + radius * np.cos(a), params.q[1] + radius * np.sin(a)]]) for a in ang]


def fd_gradient(fun, xi, step):
    """Central finite-difference gradient of a scalar function of xi."""
    z = np.asarray(xi, dtype=float).ravel()
    g = np.zeros_like(z)
    for k in range(z.size):
        e = np.zeros_like(z)
        e[k] = step
        fp = fun((z + e).reshape(-1, 2))
        fm = fun((z - e).reshape(-1, 2))
        if fp is None or fm is None:
            return None
        g[k] = (fp - fm) / (2.0 * step)
    return g


def radial_critical_point(params: ProblemParams, lo, hi, angle=0.0, energy: ReducedEnergy | None = None, xtol=1e-4):
    """m = 1 point q + r e_angle where the radial multiplier vanishes.

    Meant for rotationally invariant setups (a = const on a disc centred at q),
    where critical points of F_t form circles and c(xi) = 0 reduces to one
    scalar equation in r.  ``[lo, hi]`` must bracket a sign change.
    """
    if params.m != 1:
        raise ConfigurationError("m: radial_critical_point needs m = 1")
    F = energy if energy is not None else ReducedEnergy(params)
    e = np.array([np.cos(angle), np.sin(angle)])

    def point(r):
        return (np.asarray(params.q, dtype=float) + r * e)[None]

    def radial_c(r):
        s = F.evaluate(point(r))
        if not s.inner_converged:
            raise NumericalError("inner problem unsolved on the ray", {"radius": r})
        return float(np.asarray(s.c, dtype=float).reshape(-1, 2)[0] @ e)

    clo, chi = radial_c(lo), radial_c(hi)
    if clo * chi > 0:
        raise NumericalError("radial multiplier does not change sign on the bracket",
                             {"lo": lo, "hi": hi, "c_lo": clo, "c_hi": chi})
    r = brentq(radial_c, lo, hi, xtol=xtol)
    return point(r)
