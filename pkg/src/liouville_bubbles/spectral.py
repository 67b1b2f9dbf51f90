"""Principal Dirichlet eigenpair of -Delta_a with weight a, and assumption (A)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretization import DiscreteOperator
from .errors import DomainError, NumericalError


@dataclass(frozen=True, eq=False)
class EigenPair:
    lam: float
    phi: np.ndarray
    residual: float
    iterations: int

    def at(self, grid, point):
        return grid.interpolate(self.phi, point)


def first_eigenpair(op: DiscreteOperator, tol=1e-8, maxiter=500, shift_after=1e-2) -> EigenPair:
    """Inverse iteration on K u = lam M_a u, M_a = diag(a w), seeded with ones.

    Once the residual drops below ``shift_after`` the iteration switches to a
    single shifted factorisation (K - 0.95 lam M) for speed.
    """
    K = op.K
    M = op.mass
    solve = op.factor.solve
    u = np.ones(op.grid.size)
    lam = np.inf
    res = np.inf
    shifted = False
    for it in range(1, maxiter + 1):
        v = solve(M * u)
        u = v / np.sqrt(v @ (M * v))
        Ku = K @ u
        lam = float(u @ Ku)  # u is M-normalised
        res = float(np.linalg.norm(Ku - lam * M * u) / np.linalg.norm(Ku))
        if res <= tol:
            break
        if not shifted and res < shift_after:
            shifted_matrix = (K - 0.95 * lam * sp.diags(M)).tocsc()
            solve = spla.splu(shifted_matrix, permc_spec="MMD_AT_PLUS_A").solve
            shifted = True
    else:
        raise NumericalError("inverse iteration did not converge", {"residual": res, "lambda": lam})
    if u.sum() < 0:
        u = -u
    if np.any(u <= 0):
        raise NumericalError("principal eigenvector is not positive", {"min": float(u.min())})
    phi = u / u.max()
    lam = float(phi @ (K @ phi)) / float(phi @ (M * phi))
    return EigenPair(lam, phi, res, it)


def rayleigh_quotient(op: DiscreteOperator, u):
    return float(u @ (op.K @ u)) / float(u @ (op.mass * u))


@dataclass(frozen=True)
class AssumptionReport:
    phi_max_at_q: bool
    a_phi_strict_max_at_q: bool
    margin: float
    margin_positive: bool
    phi_q: float
    nodes_checked: int

    @property
    def holds(self):
        return self.phi_max_at_q and self.a_phi_strict_max_at_q and self.margin_positive


def check_assumption_a(op: DiscreteOperator, eig: EigenPair, q, d, tol=1e-12) -> AssumptionReport:
    """Grid check that q maximises phi_1 and strictly maximises a*phi_1 on B_d(q)."""
    grid = op.grid
    if not grid.domain.contains_ball(q, d):
        raise DomainError(f"ball B_{d}({tuple(q)}) is not contained in the domain")
    r = np.hypot(grid.x - q[0], grid.y - q[1])
    ball = np.nonzero(r <= d)[0]
    phi = eig.phi
    phi_q = grid.interpolate(phi, q)
    a_q = float(op.coefficient(np.array([q[0]]), np.array([q[1]]))[0])
    nearest = grid.nearest_node(q)
    check_i = bool(np.all(phi_q >= phi[ball] - tol * max(1.0, phi_q)))
    others = ball[ball != nearest]
    aphi = op.a[others] * phi[others]
    check_ii = bool(np.all(a_q * phi_q > aphi))
    margin = float(2.0 * phi[ball].min() - phi[ball].max())
    return AssumptionReport(check_i, check_ii, margin, margin > 0, float(phi_q), int(ball.size))
