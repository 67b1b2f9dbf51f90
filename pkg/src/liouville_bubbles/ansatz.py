"""The (m+1)-bubble approximate solution U, its residual and the weighted norm.

Everything lives in the physical variable x on one grid.  The stretched
variable y = x / eps0 only enters through explicit eps0**2 factors: a
y-variable right-hand side equals eps0**2 times its x-variable counterpart.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .discretization import (
    Coefficient,
    DiscreteOperator,
    Domain,
    QuadratureRule,
    assemble_operator,
    build_grid,
    integrate,
    make_quadrature,
    solve_dirichlet,
)
from .errors import ConfigurationError, DomainError, ResolutionError
from .green import Background, GreenTable, background
from .spectral import EigenPair, first_eigenpair

EXP_CLAMP = 700.0


def validate_alpha(alpha):
    alpha = float(alpha)
    if not alpha > -1.0:
        raise ConfigurationError(f"alpha={alpha} must be > -1")
    if alpha >= 1.0 and float(alpha).is_integer():
        raise ConfigurationError(f"alpha={alpha} must not be a positive integer (alpha in (-1, inf) minus N)")
    return alpha


@dataclass(frozen=True, eq=False)
class ProblemParams:
    """Grid-level data plus the scalar parameters (alpha, t, m, q, d)."""

    op: DiscreteOperator
    rule: QuadratureRule  # singular rule for |x-q|^{2 alpha}
    eig: EigenPair
    green: GreenTable
    bg: Background
    alpha: float
    q: tuple[float, float]
    d: float
    t: float = 6.0
    m: int = 0
    alpha_hat: float | None = None
    sigma: float | None = None
    R0: float = 10.0
    cutoff: str = "quintic"

    def __post_init__(self):
        validate_alpha(self.alpha)
        if not self.t > 0:
            raise ConfigurationError("t must be positive")
        if self.m < 0:
            raise ConfigurationError("m must be non-negative")

    @property
    def grid(self):
        return self.op.grid

    @property
    def coefficient(self) -> Coefficient:
        return self.op.coefficient

    def at(self, **changes) -> "ProblemParams":
        return replace(self, **changes)

    @cached_property
    def a_bounds(self):
        return self.coefficient.bounds(self.grid)

    @property
    def beta(self):
        a1, a2 = self.a_bounds
        return (self.m + 1 + self.alpha) ** 2 * a2 / (2.0 * a1)

    @property
    def alpha_hat_value(self):
        if self.alpha_hat is not None:
            return float(self.alpha_hat)
        return 0.5 * (-1.0 + min(self.alpha, -2.0 / 3.0))

    @property
    def sigma_value(self):
        if self.sigma is not None:
            return float(self.sigma)
        return 0.9 * min(0.5, 1.0 - 1.0 / (2.0 * self.beta), 2.0 * (1.0 + self.alpha))

    @cached_property
    def phi_q(self):
        return self.grid.interpolate(self.eig.phi, self.q)

    @cached_property
    def a_q(self):
        return float(self.coefficient(np.array([self.q[0]]), np.array([self.q[1]]))[0])

    @cached_property
    def weight0(self):
        """Nodal |x-q|^{2 alpha} k e^{-t phi_1} (singular factor cell-averaged near q)."""
        return self.rule.factor * self.bg.k * np.exp(-self.t * self.eig.phi)

    def phi_at(self, points):
        return self.grid.interpolate(self.eig.phi, points)

    def a_at(self, points):
        pts = np.atleast_2d(points)
        return self.coefficient(pts[:, 0], pts[:, 1])

    def k_at(self, points):
        """k = exp(-rho - (alpha/2) H(., q)) at arbitrary interior points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rho = np.atleast_1d(self.grid.interpolate(self.bg.rho, pts))
        Hq = np.atleast_1d(self.green.H_at(pts, self.q))
        return np.exp(-rho - 0.5 * self.alpha * Hq)


def build_problem(
    domain: Domain,
    coefficient: Coefficient,
    n: int,
    alpha: float,
    q=(0.0, 0.0),
    d=0.5,
    h_field=None,
    h_eigen_scale=0.0,
    t=6.0,
    m=0,
    solver="direct",
    solver_tol=1e-10,
    **overrides,
) -> ProblemParams:
    """Assemble operator, eigenpair, Green pole at q, background and quadrature."""
    alpha = validate_alpha(alpha)
    q = (float(q[0]), float(q[1]))
    if not domain.contains_ball(q, d):
        raise DomainError(f"B_{d}({q}) is not contained in the domain")
    grid = build_grid(domain, n)
    op = assemble_operator(grid, coefficient, solver=solver, tol=solver_tol)
    eig = first_eigenpair(op)
    table = GreenTable(op)
    if h_field is None:
        hv = np.zeros(grid.size)
    elif callable(h_field):
        hv = np.asarray(h_field(grid.x, grid.y), dtype=float) * np.ones(grid.size)
    else:
        hv = np.asarray(h_field, dtype=float) * np.ones(grid.size)
    if h_eigen_scale:
        hv = hv + h_eigen_scale * eig.lam * eig.phi
    bg = background(op, table, hv, q, alpha)
    rule = make_quadrature(grid, center=q, exponent=2.0 * alpha)
    return ProblemParams(op, rule, eig, table, bg, alpha, q, float(d), t=float(t), m=int(m), **overrides)


@dataclass(frozen=True, eq=False)
class BubbleConfig:
    """All ansatz scales for one (t, xi)."""

    params: ProblemParams
    xi: np.ndarray  # (m, 2)
    mu0: float
    mu: np.ndarray
    eps0: float
    eps: np.ndarray
    k_q: float
    k_xi: np.ndarray

    @property
    def m(self):
        return self.xi.shape[0]

    @property
    def alpha(self):
        return self.params.alpha

    @property
    def rho0(self):
        return self.eps0 ** (1.0 / (1.0 + self.alpha))

    @property
    def v0(self):
        return self.mu0 ** (1.0 / (1.0 + self.alpha))

    @property
    def core0(self):
        """rho0 * v0: width of the bubble at q."""
        return self.rho0 * self.v0

    @property
    def cores(self):
        """eps_i * mu_i: widths of the bubbles at xi_i."""
        return self.eps * self.mu

    @property
    def gamma(self):
        return self.cores / self.eps0

    @property
    def dist_q(self):
        return np.hypot(self.xi[:, 0] - self.params.q[0], self.xi[:, 1] - self.params.q[1])

    def check_resolution(self, factor=4.0):
        h = self.params.grid.h
        widths = [self.core0, *self.cores]
        if min(widths) < factor * h:
            raise ResolutionError(
                f"bubble core {min(widths):.3g} below {factor:g}h = {factor * h:.3g}; "
                "lower t or refine the grid (or force)"
            )

    def scales(self):
        p = self.params
        return {
            "t": p.t,
            "m": self.m,
            "alpha": p.alpha,
            "xi": self.xi.tolist(),
            "mu0": self.mu0,
            "mu": self.mu.tolist(),
            "eps0": self.eps0,
            "eps": self.eps.tolist(),
            "rho0": self.rho0,
            "v0": self.v0,
            "core0": self.core0,
            "cores": self.cores.tolist(),
            "gamma": self.gamma.tolist(),
            "beta": p.beta,
            "alpha_hat": p.alpha_hat_value,
            "sigma": p.sigma_value,
            "R0": p.R0,
            "k_q": self.k_q,
            "k_xi": self.k_xi.tolist(),
            "phi1_q": p.phi_q,
            "h": p.grid.h,
        }


def _as_points(xi, m):
    xi = np.asarray(xi, dtype=float).reshape(-1, 2) if np.size(xi) else np.zeros((0, 2))
    if xi.shape[0] != m:
        raise ConfigurationError(f"expected {m} bubble points, got {xi.shape[0]}")
    return xi


def solve_mu(params: ProblemParams, xi):
    """Concentration parameters from the matching conditions at q and at each xi_i."""
    p = params
    xi = _as_points(xi, p.m)
    a1 = 1.0 + p.alpha
    q = np.asarray(p.q)
    for i in range(p.m):
        if np.hypot(*(xi[i] - q)) == 0:
            raise ConfigurationError("bubble point coincides with q")
        for j in range(i):
            if np.hypot(*(xi[i] - xi[j])) == 0:
                raise ConfigurationError("coincident bubble points")
        if float(p.grid.domain.signed_distance(*xi[i])) > -2 * p.grid.h:
            raise DomainError("bubble point too close to the boundary")
    for x in xi:
        p.green.add(x)
    k_q = float(np.exp(p.bg.log_k_q))
    rhs0 = a1 * p.green.robin(p.q) + sum(p.green.value(p.q, x) for x in xi)
    mu0 = np.sqrt(k_q * np.exp(rhs0) / (8.0 * a1**2))
    k_xi = p.k_at(xi) if p.m else np.zeros(0)
    mu = np.zeros(p.m)
    for i in range(p.m):
        rhs = p.green.robin(xi[i]) + a1 * p.green.value(xi[i], p.q)
        rhs += sum(p.green.value(xi[i], xi[j]) for j in range(p.m) if j != i)
        ri = np.hypot(*(xi[i] - q))
        mu[i] = np.sqrt(k_xi[i] * ri ** (2 * p.alpha) * np.exp(rhs) / 8.0)
    return float(mu0), mu, k_q, np.asarray(k_xi, dtype=float)


def make_config(params: ProblemParams, xi=()) -> BubbleConfig:
    xi = _as_points(xi, params.m)
    mu0, mu, k_q, k_xi = solve_mu(params, xi)
    eps0 = float(np.exp(-0.5 * params.t * params.phi_q))
    eps = np.exp(-0.5 * params.t * params.phi_at(xi)) if params.m else np.zeros(0)
    return BubbleConfig(params, xi, mu0, np.atleast_1d(mu), eps0, np.atleast_1d(eps), k_q, np.atleast_1d(k_xi))


# ---------------------------------------------------------------- profiles


def profile(config: BubbleConfig, i, x, y):
    """u_0 (i = 0) or u_i at arbitrary points."""
    p = config.params
    a1 = 1.0 + p.alpha
    if i == 0:
        r2 = (x - p.q[0]) ** 2 + (y - p.q[1]) ** 2
        core = (config.eps0 * config.mu0) ** 2
        const = np.log(8.0 * config.mu0**2 * a1**2 / config.k_q)
        return const - 2.0 * np.log(core + r2**a1)
    xi = config.xi[i - 1]
    mu, eps = config.mu[i - 1], config.eps[i - 1]
    rq = config.dist_q[i - 1]
    const = np.log(8.0 * mu**2 / (config.k_xi[i - 1] * rq ** (2 * p.alpha)))
    return const - 2.0 * np.log((eps * mu) ** 2 + (x - xi[0]) ** 2 + (y - xi[1]) ** 2)


def profile_gradient(config: BubbleConfig, i, x, y):
    p = config.params
    a1 = 1.0 + p.alpha
    if i == 0:
        dx, dy = x - p.q[0], y - p.q[1]
        r2 = dx * dx + dy * dy
        core = (config.eps0 * config.mu0) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(r2 > 0, -4.0 * a1 * r2**p.alpha / (core + r2**a1), 0.0)
        return s * dx, s * dy
    xi = config.xi[i - 1]
    dx, dy = x - xi[0], y - xi[1]
    s = -4.0 / (config.cores[i - 1] ** 2 + dx * dx + dy * dy)
    return s * dx, s * dy


def profile_laplacian(config: BubbleConfig, i, factor=None):
    """Analytic Delta u_i at the nodes (singular factor cell-averaged near q)."""
    p = config.params
    grid = p.grid
    u = profile(config, i, grid.x, grid.y)
    if i == 0:
        s = p.rule.factor if factor is None else factor
        return -(config.eps0**2) * config.k_q * s * np.exp(u)
    rq = config.dist_q[i - 1]
    return -(config.eps[i - 1] ** 2) * config.k_xi[i - 1] * rq ** (2 * p.alpha) * np.exp(u)


def bubble_profiles(config: BubbleConfig):
    grid = config.params.grid
    return [profile(config, i, grid.x, grid.y) for i in range(config.m + 1)]


def corrections(config: BubbleConfig, mode="exact"):
    """Correction terms H_i and their boundary traces."""
    p = config.params
    grid = p.grid
    a1 = 1.0 + p.alpha
    out, traces = [], []
    for i in range(config.m + 1):
        if mode == "exact":
            if p.coefficient.is_constant():
                f = np.zeros(grid.size)
            else:
                gx, gy = p.coefficient.grad_log(grid.x, grid.y, grid.h)
                ux, uy = profile_gradient(config, i, grid.x, grid.y)
                f = gx * ux + gy * uy
            trace = -profile(config, i, grid.bx, grid.by)
            out.append(solve_dirichlet(p.op, f, trace))
            traces.append(trace)
        elif mode == "leading":
            if i == 0:
                c = np.log(8.0 * config.mu0**2 * a1**2 / config.k_q)
                out.append(a1 * p.green.H(p.q) - c)
                traces.append(a1 * 4.0 * np.log(np.hypot(grid.bx - p.q[0], grid.by - p.q[1])) - c)
            else:
                xi = config.xi[i - 1]
                mu = config.mu[i - 1]
                c = np.log(8.0 * mu**2 / (config.k_xi[i - 1] * config.dist_q[i - 1] ** (2 * p.alpha)))
                out.append(p.green.H(xi) - c)
                traces.append(4.0 * np.log(np.hypot(grid.bx - xi[0], grid.by - xi[1])) - c)
        else:
            raise ConfigurationError(f"unknown correction mode {mode!r}")
    return out, traces


@dataclass(frozen=True, eq=False)
class AnsatzFields:
    config: BubbleConfig
    u: list
    H: list
    U: np.ndarray
    U_trace: np.ndarray
    W: np.ndarray
    E: np.ndarray  # analytic bubble Laplacians + discrete corrections
    E_discrete: np.ndarray  # -Delta_h U + W
    clamped: bool = False
    mode: str = "exact"

    @property
    def params(self):
        return self.config.params


def assemble(config: BubbleConfig, mode="exact") -> AnsatzFields:
    """U = sum(u_i + H_i), W = |x-q|^{2a} k e^{-t phi_1} e^U, and the residual E = Delta_a U + W."""
    p = config.params
    grid = p.grid
    u = bubble_profiles(config)
    H, traces = corrections(config, mode)
    U = np.sum(u, axis=0) + np.sum(H, axis=0)
    trace = sum(profile(config, i, grid.bx, grid.by) + traces[i] for i in range(config.m + 1))
    clamped = bool(np.any(U > EXP_CLAMP))
    W = p.weight0 * np.exp(np.minimum(U, EXP_CLAMP))
    lap = sum(profile_laplacian(config, i) for i in range(config.m + 1))
    if mode == "exact" or p.coefficient.is_constant():
        E = lap + W
    else:
        # leading corrections do not cancel the drift of u_i
        E = -p.op.apply(U, trace) + W
    E_discrete = -p.op.apply(U, trace) + W
    return AnsatzFields(config, u, H, U, np.asarray(trace, dtype=float), W, E, E_discrete, clamped, mode)


# ---------------------------------------------------------------- admissibility and norms


def in_configuration_space(params: ProblemParams, xi):
    """Membership of xi in the admissible set with per-constraint slack.

    Slack is positive when a constraint holds strictly; ``scale`` is the
    natural size of each constraint, used for relative margins.
    """
    p = params
    xi = _as_points(xi, p.m)
    q = np.asarray(p.q)
    tb = p.t ** (-p.beta)
    level = p.a_q * p.phi_q
    margins = []
    for i in range(p.m):
        r = float(np.hypot(*(xi[i] - q)))
        margins.append({"constraint": f"ball[{i}]", "slack": p.d - r, "scale": p.d})
        gap = level - float(p.a_at(xi[i])[0] * p.phi_at(xi[i]))
        margins.append({"constraint": f"level[{i}]", "slack": p.t**-0.5 - gap, "scale": p.t**-0.5, "gap": gap})
        margins.append({"constraint": f"dist_q[{i}]", "slack": r - tb, "scale": tb})
        for j in range(i + 1, p.m):
            dij = float(np.hypot(*(xi[i] - xi[j])))
            margins.append({"constraint": f"dist[{i},{j}]", "slack": dij - tb, "scale": tb})
    ok = all(mg["slack"] >= 0 for mg in margins)
    return ok, margins


def star_weight(config: BubbleConfig):
    """Bracketed weight of the *-norm, expressed at the nodes in x."""
    p = config.params
    grid = p.grid
    ah = p.alpha_hat_value
    s0 = config.core0
    r = np.hypot(grid.x - p.q[0], grid.y - p.q[1]) / s0
    w = np.full(grid.size, config.eps0**2)
    w += (config.eps0 / s0) ** 2 * p.rule.factor / s0 ** (2 * p.alpha) / (1.0 + r) ** (4 + 2 * ah + 2 * p.alpha)
    for i in range(config.m):
        ri = np.hypot(grid.x - config.xi[i, 0], grid.y - config.xi[i, 1]) / config.cores[i]
        w += config.gamma[i] ** -2 * (1.0 + ri) ** (-4 - 2 * ah)
    return w


def star_norm(field_x, config: BubbleConfig, mask=None):
    """sup |eps0^2 f| / weight over interior nodes (optionally restricted)."""
    ratio = np.abs(config.eps0**2 * np.asarray(field_x)) / star_weight(config)
    if mask is not None:
        ratio = ratio[mask]
    return float(ratio.max()) if ratio.size else 0.0


def integrate_profile_mass(alpha, n=256, core=0.1, radius=1.0):
    """Masses of the q- and xi-bubble integrands on a disc, plus the analytic tail outside it.

    Both bubbles sit at the disc centre with core width ``core``.  Returns the
    totals and their relative deviations from 8 pi (1 + alpha) and 8 pi.
    """
    a1 = 1.0 + alpha
    dom = Domain.disc(radius, (0.0, 0.0))
    pq = build_problem(dom, Coefficient.constant(1.0), n, alpha, q=(0.0, 0.0), d=0.5 * radius, t=4.0, m=0)
    cq = make_config(pq)
    eps0 = cq.eps0
    cq = replace(cq, mu0=core**a1 / eps0, k_q=1.0)
    c2 = (eps0 * cq.mu0) ** 2
    dens_q = eps0**2 * cq.k_q * np.exp(profile(cq, 0, pq.grid.x, pq.grid.y))
    tail_q = 8.0 * np.pi * a1 * c2 / (c2 + radius ** (2 * a1))
    mass_q = integrate(dens_q, pq.rule) + tail_q

    # xi-bubble at the centre; q only enters through a constant that cancels
    rq = 0.5 * radius
    mu1 = core / eps0
    u1 = np.log(8.0 * mu1**2 / rq ** (2 * alpha)) - 2.0 * np.log(core**2 + pq.grid.x**2 + pq.grid.y**2)
    dens_x = eps0**2 * rq ** (2 * alpha) * np.exp(u1)
    tail_x = 8.0 * np.pi * core**2 / (core**2 + radius**2)
    mass_x = float(pq.grid.weights @ dens_x) + tail_x
    exact_q, exact_x = 8.0 * np.pi * a1, 8.0 * np.pi
    return {
        "mass_q": mass_q,
        "mass_xi": mass_x,
        "tail_q": tail_q,
        "tail_xi": tail_x,
        "rel_error_q": abs(mass_q - exact_q) / exact_q,
        "rel_error_xi": abs(mass_x - exact_x) / exact_x,
    }
