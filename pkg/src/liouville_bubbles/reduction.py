"""Projected linearized solver and the inner nonlinear problem.

The x-variable system is

    (-Delta_a - W) phi = h + (1/a) sum_ij c_ij chi_i Z_ij,   phi = 0 on the boundary,
    int chi_i Z_ij phi = 0,

which after multiplying by the lumped mass a*w reads L phi = a w h + B c with
L = K - diag(a w W) and B[:, (i, j)] = w chi_i Z_ij.  It is solved by bordering
on a single sparse LU of L.  Multipliers are reported in the stretched-variable
convention c_y = eps0**2 c_x.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .ansatz import AnsatzFields, BubbleConfig, star_norm
from .errors import ConfigurationError, NumericalError


def ramp(s, kind="quintic"):
    """Cutoff profile on [0, 1]: 1 at 0, 0 at 1."""
    s = np.clip(s, 0.0, 1.0)
    if kind == "quintic":
        return 1.0 - s**3 * (10.0 - 15.0 * s + 6.0 * s * s)
    if kind == "cosine":
        return 0.5 * (1.0 + np.cos(np.pi * s))
    raise ConfigurationError(f"unknown cutoff ramp {kind!r}")


def cutoff(r, R0, kind="quintic"):
    return ramp(np.asarray(r, dtype=float) - R0, kind)


def z_translation(z1, z2, j):
    zj = z1 if j == 1 else z2
    return 4.0 * zj / (z1 * z1 + z2 * z2 + 1.0)


def z_dilation(z1, z2):
    r2 = z1 * z1 + z2 * z2
    return (r2 - 1.0) / (r2 + 1.0)


def z_dilation_q(z1, z2, alpha):
    p = (z1 * z1 + z2 * z2) ** (1.0 + alpha)
    return (p - 1.0) / (p + 1.0)


@dataclass(frozen=True, eq=False)
class ProjectionBasis:
    config: BubbleConfig
    R0: float
    chi: np.ndarray  # (m, N)
    chiZ: np.ndarray  # (m, 2, N)
    chiZ0: np.ndarray  # (m, N) diagnostic
    chiZq: np.ndarray  # (N,) diagnostic
    kind: str = "quintic"

    @property
    def m(self):
        return self.chi.shape[0]

    @property
    def columns(self):
        """(N, 2m) matrix of w chi_i Z_ij, column order (i, j) row-major."""
        w = self.config.params.grid.weights
        return (self.chiZ.reshape(2 * self.m, w.size) * w).T

    def pair(self, phi):
        """Discrete int chi_i Z_ij phi as an (m, 2) array."""
        w = self.config.params.grid.weights
        return np.einsum("ijn,n->ij", self.chiZ, w * phi)


def build_basis(config: BubbleConfig, R0=None, kind=None) -> ProjectionBasis:
    p = config.params
    grid = p.grid
    R0 = p.R0 if R0 is None else float(R0)
    kind = p.cutoff if kind is None else kind
    m = config.m
    for i in range(m):
        for j in range(i + 1, m):
            dij = float(np.hypot(*(config.xi[i] - config.xi[j])))
            reach = (R0 + 1.0) * (config.cores[i] + config.cores[j])
            if reach >= dij:
                hint = dij / (config.cores[i] + config.cores[j]) - 1.0
                raise ConfigurationError(
                    f"cutoff supports of bubbles {i} and {j} overlap; use R0 < {hint:.3g}"
                )
    chi = np.zeros((m, grid.size))
    chiZ = np.zeros((m, 2, grid.size))
    chiZ0 = np.zeros((m, grid.size))
    for i in range(m):
        s = config.cores[i]
        z1 = (grid.x - config.xi[i, 0]) / s
        z2 = (grid.y - config.xi[i, 1]) / s
        chi[i] = cutoff(np.hypot(z1, z2), R0, kind)
        g = config.gamma[i]
        for j in (1, 2):
            chiZ[i, j - 1] = chi[i] * z_translation(z1, z2, j) / g
        chiZ0[i] = chi[i] * z_dilation(z1, z2) / g
    s0 = config.core0
    z1 = (grid.x - p.q[0]) / s0
    z2 = (grid.y - p.q[1]) / s0
    chiZq = cutoff(np.hypot(z1, z2), R0, kind) * z_dilation_q(z1, z2, p.alpha)
    return ProjectionBasis(config, R0, chi, chiZ, chiZ0, chiZq, kind)


@dataclass(frozen=True, eq=False)
class ReductionSolve:
    phi: np.ndarray
    c: np.ndarray  # (m, 2), stretched-variable convention
    c_x: np.ndarray  # (m, 2), as assembled in x
    constraint_residual: float
    pde_residual: float
    phi_sup: float
    h_star: float
    ratio: float  # ||phi||_inf / (t ||h||_*)
    log: list = field(default_factory=list)
    converged: bool = True

    def report(self):
        return {
            "c": self.c.tolist(),
            "c_x": self.c_x.tolist(),
            "c_max": float(np.abs(self.c).max()) if self.c.size else 0.0,
            "constraint_residual": self.constraint_residual,
            "pde_residual": self.pde_residual,
            "phi_sup": self.phi_sup,
            "h_star": self.h_star,
            "ratio": self.ratio,
            "converged": self.converged,
            "log": self.log,
        }


class ProjectedSolver:
    """Factorises L = K - diag(a w W) once and solves the bordered system for any h."""

    def __init__(self, config: BubbleConfig, W_x, basis: ProjectionBasis | None = None, cond_max=1e12):
        p = config.params
        self.config = config
        self.op = p.op
        self.basis = build_basis(config) if basis is None else basis
        self.W = np.asarray(W_x, dtype=float)
        mass = self.op.mass
        self.L = (self.op.K - sp.diags(mass * self.W)).tocsc()
        try:
            self.lu = spla.splu(self.L, permc_spec="MMD_AT_PLUS_A")
        except RuntimeError as exc:
            raise NumericalError("linearized operator is singular", {"error": str(exc)}) from exc
        self.B = self.basis.columns
        if self.B.shape[1]:
            self.Y = self.lu.solve(np.ascontiguousarray(self.B))
            self.S = self.B.T @ self.Y
            cond = np.linalg.cond(self.S)
            if not np.isfinite(cond) or cond > cond_max:
                raise NumericalError("bordered system is singular", {"cond": float(cond)})
        else:
            self.Y = np.zeros((self.L.shape[0], 0))
            self.S = np.zeros((0, 0))

    def _solve(self, rhs, r2=None):
        phi = self.lu.solve(rhs)
        c = np.zeros(self.B.shape[1])
        if c.size:
            target = -(self.B.T @ phi) if r2 is None else r2 - self.B.T @ phi
            c = np.linalg.solve(self.S, target)
            phi = phi + self.Y @ c
        return phi, c

    def solve(self, h_x, constraint_rhs=None) -> ReductionSolve:
        """Solve L phi = a w h + B c with B^T phi = constraint_rhs (default 0)."""
        config = self.config
        h_x = np.asarray(h_x, dtype=float)
        rhs = self.op.mass * h_x
        r2_target = np.zeros(self.B.shape[1]) if constraint_rhs is None else np.asarray(constraint_rhs, float)
        phi, c = self._solve(rhs, r2_target)
        # one step of iterative refinement on the full bordered system
        r1 = rhs + self.B @ c - self.L @ phi
        r2 = r2_target - self.B.T @ phi
        dphi, dc = self._solve(r1, r2)
        phi = phi + dphi
        c = c + dc
        m = config.m
        phi_sup = float(np.abs(phi).max())
        pde = float(np.abs(self.L @ phi - rhs - self.B @ c).max() / max(np.abs(rhs).max(), 1e-300))
        if m:
            pairs = self.basis.pair(phi) - r2_target.reshape(m, 2)
            w = config.params.grid.weights
            zn = np.sqrt(np.einsum("ijn,n->ij", self.basis.chiZ**2, w))
            cres = float(np.max(np.abs(pairs) / (zn * max(phi_sup, 1e-300) * np.sqrt(w.sum()))))
        else:
            cres = 0.0
        hs = star_norm(h_x, config)
        ratio = phi_sup / (config.params.t * hs) if hs > 0 else 0.0
        c_x = c.reshape(m, 2)
        return ReductionSolve(phi, config.eps0**2 * c_x, c_x, cres, pde, phi_sup, hs, ratio)


def solve_projected(h_x, config: BubbleConfig, W_x, basis=None) -> ReductionSolve:
    return ProjectedSolver(config, W_x, basis).solve(h_x)


def nonlinear_term(phi, W_x):
    """N = W (e^phi - 1 - phi), with W = |x-q|^{2a} k e^{-t phi_1} e^U."""
    phi = np.asarray(phi, dtype=float)
    return np.asarray(W_x) * (np.expm1(phi) - phi)


def solve_inner(
    fields: AnsatzFields,
    residual="discrete",
    E=None,
    tol=1e-10,
    maxiter=50,
    relax=1.0,
    adaptive=True,
    relax_min=1.0 / 64.0,
    max_update=1.0,
    basis=None,
    solver: ProjectedSolver | None = None,
) -> ReductionSolve:
    """Fixed point phi <- phi + theta (T(E + N(phi)) - phi).

    ``residual`` selects the discrete residual -Delta_h U + W (default), which
    makes U + phi an exact discrete solution whenever c vanishes, or the
    analytic one built from closed-form bubble Laplacians.  With ``adaptive``
    the relaxation theta is halved whenever the fixed-point residual grows;
    theta = 1 is the plain iteration.  Each applied update is additionally
    capped at ``max_update`` in sup norm so e^phi cannot overflow.  The step ||T(phi) - phi||_inf is the
    convergence measure and its successive ratios are the contraction factors.
    """
    config = fields.config
    if E is None:
        if residual == "discrete":
            E = fields.E_discrete
        elif residual == "analytic":
            E = fields.E
        else:
            raise ConfigurationError(f"unknown residual mode {residual!r}")
    E = np.asarray(E, dtype=float)
    T = solver if solver is not None else ProjectedSolver(config, fields.W, basis)
    phi = np.zeros_like(E)
    theta = float(relax)
    log = []
    prev_step = None
    bad = 0
    result = None
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, maxiter + 1):
            result = T.solve(E + nonlinear_term(phi, fields.W))
            if not np.all(np.isfinite(result.phi)):
                raise NumericalError("inner iteration produced non-finite values", {"log": log})
            step = float(np.abs(result.phi - phi).max())
            factor = step / prev_step if prev_step else None
            log.append({"iteration": k, "step": step, "phi_sup": result.phi_sup, "factor": factor, "relax": theta})
            if step <= tol:
                phi = result.phi
                break
            if factor is not None and factor >= 1.0:
                bad += 1
                if bad >= 5:
                    raise NumericalError("inner fixed point diverges", {"log": log})
                if adaptive and theta > relax_min:
                    theta = max(0.5 * theta, relax_min)
                    bad = 0
            else:
                bad = 0
            phi = phi + min(theta, max_update / step) * (result.phi - phi)
            prev_step = step
    converged = log[-1]["step"] <= tol
    e_star = star_norm(E, config)
    return ReductionSolve(
        result.phi, result.c, result.c_x, result.constraint_residual, result.pde_residual,
        result.phi_sup, e_star, result.phi_sup / (config.params.t * e_star) if e_star > 0 else 0.0,
        log, converged,
    )


def solve_inner_newton(
    fields: AnsatzFields,
    residual="discrete",
    E=None,
    tol=1e-10,
    maxiter=50,
    basis=None,
    phi0=None,
) -> ReductionSolve:
    """Same saddle problem as :func:`solve_inner`, solved by damped projected Newton.

    The Jacobian in phi is K - diag(a w W e^phi); each step is one bordered
    solve.  Used where the plain fixed point is too weak (O(1) corrections).
    ``phi0`` is an optional warm start; its constraint defect is removed by
    the first step.
    """
    config = fields.config
    if E is None:
        E = fields.E_discrete if residual == "discrete" else fields.E
    E = np.asarray(E, dtype=float)
    op = config.params.op
    basis = build_basis(config) if basis is None else basis
    B = basis.columns
    L0 = (op.K - sp.diags(op.mass * fields.W)).tocsc()
    phi = np.zeros_like(E) if phi0 is None else np.array(phi0, dtype=float)
    c = np.zeros(B.shape[1])

    def residual_of(phi, c):
        return (L0 @ phi - op.mass * (E + nonlinear_term(phi, fields.W)) - B @ c) / op.mass

    log = []
    with np.errstate(over="ignore", invalid="ignore"):
        g = residual_of(phi, c)
        norm = float(np.abs(g).max())
        for k in range(1, maxiter + 1):
            defect = basis.pair(phi).ravel() if B.shape[1] else np.zeros(0)
            if norm <= tol * max(1.0, float(np.abs(E).max())) and np.all(np.abs(defect) <= 1e-12):
                break
            T = ProjectedSolver(config, fields.W * np.exp(phi), basis)
            step = T.solve(-g, -defect)
            lam = 1.0
            while lam >= 1.0 / 1024:
                phi_n = phi + lam * step.phi
                c_n = c + lam * step.c_x.ravel()
                g_n = residual_of(phi_n, c_n)
                norm_n = float(np.abs(g_n).max())
                if np.isfinite(norm_n) and (norm_n < norm or (k == 1 and phi0 is not None and lam == 1.0)):
                    break
                lam *= 0.5
            else:
                raise NumericalError("projected Newton line search stagnated", {"log": log})
            log.append({"iteration": k, "step": float(lam * np.abs(step.phi).max()), "residual": norm_n,
                        "damping": lam, "factor": norm_n / norm})
            phi, c, g, norm = phi_n, c_n, g_n, norm_n
    converged = norm <= tol * max(1.0, float(np.abs(E).max()))
    final = ProjectedSolver(config, fields.W, basis).solve(E + nonlinear_term(phi, fields.W))
    e_star = star_norm(E, config)
    phi_sup = float(np.abs(phi).max())
    c_x = c.reshape(config.m, 2)
    return ReductionSolve(
        phi, config.eps0**2 * c_x, c_x, final.constraint_residual, norm, phi_sup, e_star,
        phi_sup / (config.params.t * e_star) if e_star > 0 else 0.0, log, converged,
    )


def contraction_factors(solve: ReductionSolve):
    return [e["factor"] for e in solve.log if e["factor"] is not None]


def asymptotic_contraction(solve: ReductionSolve, tail=5):
    """Geometric mean of the last ``tail`` contraction factors."""
    f = [x for x in contraction_factors(solve) if x > 0]
    if not f:
        return 0.0
    f = f[-tail:]
    return float(np.exp(np.mean(np.log(f))))
