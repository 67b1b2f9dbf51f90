"""Regular part H(x, y) of the anisotropic Green function, background rho and k."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .discretization import DiscreteOperator, solve_dirichlet
from .errors import ConfigurationError, DomainError
from .io import write_field_csv


def _key(y):
    return (round(float(y[0]), 12), round(float(y[1]), 12))


def regular_part(op: DiscreteOperator, y) -> np.ndarray:
    """Nodal H(., y) from -Delta_a H = -4 (x-y).grad(log a)/|x-y|^2, H = 4 log|x-y| on the boundary."""
    grid = op.grid
    y = (float(y[0]), float(y[1]))
    if float(grid.domain.signed_distance(*y)) > -2 * grid.h:
        raise DomainError(f"pole {y} must lie at least 2h inside the domain")
    if op.coefficient.is_constant():
        f = np.zeros(grid.size)
    else:
        gx, gy = op.coefficient.grad_log(grid.x, grid.y, grid.h)
        dx = grid.x - y[0]
        dy = grid.y - y[1]
        r2 = dx * dx + dy * dy
        pole = grid.nearest_node(y)
        r2[pole] = 1.0
        f = -4.0 * (dx * gx + dy * gy) / r2
        f[pole] = 0.0  # symmetric cell average of (x-y)/|x-y|^2
    return solve_dirichlet(op, f, lambda bx, by: 4.0 * np.log(np.hypot(bx - y[0], by - y[1])))


@dataclass(eq=False)
class GreenTable:
    """Cache of regular parts H(., y) keyed by pole."""

    op: DiscreteOperator
    fields: dict = field(default_factory=dict)

    def add(self, y):
        k = _key(y)
        if k not in self.fields:
            self.fields[k] = regular_part(self.op, k)
        return self.fields[k]

    def H(self, y):
        k = _key(y)
        if k not in self.fields:
            raise ConfigurationError(f"pole {k} not in the Green table")
        return self.fields[k]

    def H_at(self, x, y):
        """H(x, y) by bilinear interpolation of H(., y)."""
        y = _key(y)
        ext = lambda bx, by: 4.0 * np.log(np.maximum(np.hypot(bx - y[0], by - y[1]), 1e-300))  # noqa: E731
        return self.op.grid.interpolate(self.H(y), x, exterior=ext)

    def robin(self, y):
        return self.H_at(y, y)

    def value(self, x, y):
        """G(x, y) = 4 log(1/|x-y|) + H(x, y)."""
        x = np.asarray(x, dtype=float)
        r = np.hypot(*(np.atleast_2d(x) - np.asarray(y, float)).T)
        if np.any(r == 0):
            raise ConfigurationError("G(x, y) is singular at x = y")
        out = -4.0 * np.log(r) + np.atleast_1d(self.H_at(x, y))
        return out if x.ndim > 1 else float(out[0])

    def G_field(self, y):
        """Nodal G(., y); +inf at a node coinciding with y."""
        grid = self.op.grid
        r = np.hypot(grid.x - y[0], grid.y - y[1])
        with np.errstate(divide="ignore"):
            return -4.0 * np.log(r) + self.H(y)

    def save(self, directory):
        """Per-pole CSV dumps plus a JSON index keyed by grid/coefficient hash."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        grid = self.op.grid
        grid_hash = hashlib.sha256(grid.fingerprint.encode()).hexdigest()[:16]
        coef_hash = hashlib.sha256(json.dumps(self.op.coefficient.to_dict(), sort_keys=True).encode()).hexdigest()[:16]
        index = []
        for n, (k, values) in enumerate(sorted(self.fields.items())):
            name = f"H_pole{n:03d}.csv"
            write_field_csv(directory / name, grid, values)
            index.append({"grid": grid_hash, "coefficient": coef_hash, "pole": list(k), "file": name,
                          "robin": self.robin(k)})
        (directory / "green_index.json").write_text(json.dumps(index, indent=2, sort_keys=True))
        return index


@dataclass(frozen=True, eq=False)
class Background:
    rho: np.ndarray
    k: np.ndarray
    log_k_q: float
    alpha: float
    q: tuple[float, float]

    def k_at(self, grid, points):
        """k at arbitrary points via interpolation of log k."""
        return np.exp(grid.interpolate(np.log(self.k), points, exterior=None))


def background(op: DiscreteOperator, table: GreenTable, h_field, q, alpha) -> Background:
    """rho = (-Delta_a)^{-1} h with zero trace, k = exp(-rho - (alpha/2) H(., q))."""
    grid = op.grid
    if float(grid.domain.signed_distance(*q)) >= 0:
        raise DomainError("q must be interior")
    h_field = np.asarray(h_field, dtype=float) * np.ones(grid.size)
    rho = solve_dirichlet(op, h_field, 0.0) if np.any(h_field) else np.zeros(grid.size)
    Hq = table.add(q)
    k = np.exp(-rho - 0.5 * alpha * Hq)
    log_k_q = -grid.interpolate(rho, q) - 0.5 * alpha * table.robin(q)
    return Background(rho, k, float(log_k_q), float(alpha), (float(q[0]), float(q[1])))
