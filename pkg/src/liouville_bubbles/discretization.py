"""Cartesian grids, the divergence-form operator, quadrature and Dirichlet solves.

Fields are plain 1-D numpy arrays over the interior nodes of a :class:`Grid`
(C order over ``(i, j)``).  Boundary data are given per boundary *arm*: every
interior node whose neighbour lies outside the domain owns a short arm ending
on the exact boundary (Shortley-Weller), and ``grid.bx, grid.by`` list those
end points.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import hyp2f1

from .errors import ConfigurationError, DomainError, NumericalError

# E, W, N, S
DIRECTIONS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])


@dataclass(frozen=True)
class Domain:
    """Unit-disc-like or axis-aligned rectangular domain."""

    kind: str
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    lower: tuple[float, float] = (0.0, 0.0)
    upper: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.kind not in ("disc", "rectangle"):
            raise ConfigurationError(f"unknown domain kind {self.kind!r}")
        if self.kind == "disc" and not self.radius > 0:
            raise DomainError("disc radius must be positive")
        if self.kind == "rectangle" and not (self.upper[0] > self.lower[0] and self.upper[1] > self.lower[1]):
            raise DomainError("rectangle upper corner must exceed the lower corner")

    @classmethod
    def disc(cls, radius=1.0, center=(0.0, 0.0)):
        return cls("disc", center=tuple(map(float, center)), radius=float(radius))

    @classmethod
    def rectangle(cls, lower=(0.0, 0.0), upper=(1.0, 1.0)):
        return cls("rectangle", lower=tuple(map(float, lower)), upper=tuple(map(float, upper)))

    @property
    def bbox(self):
        if self.kind == "disc":
            cx, cy = self.center
            r = self.radius
            return (cx - r, cy - r, cx + r, cy + r)
        return (*self.lower, *self.upper)

    @property
    def area(self):
        if self.kind == "disc":
            return np.pi * self.radius**2
        return (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1])

    def signed_distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "disc":
            return np.hypot(x - self.center[0], y - self.center[1]) - self.radius
        cx = 0.5 * (self.lower[0] + self.upper[0])
        cy = 0.5 * (self.lower[1] + self.upper[1])
        hx = 0.5 * (self.upper[0] - self.lower[0])
        hy = 0.5 * (self.upper[1] - self.lower[1])
        dx = np.abs(x - cx) - hx
        dy = np.abs(y - cy) - hy
        outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
        return outside + np.minimum(np.maximum(dx, dy), 0.0)

    def ray_exit(self, x, y, direction):
        """Distance from interior points to the boundary along an axis direction."""
        dx, dy = direction
        if self.kind == "disc":
            px = x - self.center[0]
            py = y - self.center[1]
            pd = px * dx + py * dy
            disc = pd**2 - (px**2 + py**2) + self.radius**2
            return -pd + np.sqrt(np.maximum(disc, 0.0))
        if dx > 0:
            return self.upper[0] - x
        if dx < 0:
            return x - self.lower[0]
        if dy > 0:
            return self.upper[1] - y
        return y - self.lower[1]

    def contains_ball(self, center, radius):
        return float(self.signed_distance(center[0], center[1])) + radius < 0.0

    def to_dict(self):
        if self.kind == "disc":
            return {"kind": "disc", "radius": self.radius, "center": list(self.center)}
        return {"kind": "rectangle", "lower": list(self.lower), "upper": list(self.upper)}


@dataclass(frozen=True, eq=False)
class Grid:
    domain: Domain
    n: int
    h: float
    nx: int
    ny: int
    origin: tuple[float, float]
    index: np.ndarray  # (nx+1, ny+1) interior index or -1
    i: np.ndarray
    j: np.ndarray
    x: np.ndarray
    y: np.ndarray
    arms: np.ndarray  # (N, 4) arm fractions in (0, 1]
    nbr: np.ndarray  # (N, 4) neighbour interior index, -1 for a boundary arm
    b_node: np.ndarray  # owning interior node of each boundary arm
    b_dir: np.ndarray
    bx: np.ndarray
    by: np.ndarray

    @property
    def size(self):
        return self.x.size

    @property
    def n_boundary(self):
        return self.bx.size

    @cached_property
    def node_class(self):
        """0 exterior, 1 interior with four full arms, 2 boundary-adjacent."""
        cls = np.zeros(self.index.shape, dtype=np.int8)
        regular = np.all(self.nbr >= 0, axis=1)
        cls[self.i, self.j] = np.where(regular, 1, 2)
        return cls

    @cached_property
    def regular(self):
        return np.all(self.nbr >= 0, axis=1)

    @cached_property
    def weights(self):
        """Dual-cell areas clipped by the arms: h^2 * mean(E, W) * mean(N, S)."""
        a = self.arms
        return self.h**2 * 0.5 * (a[:, 0] + a[:, 1]) * 0.5 * (a[:, 2] + a[:, 3])

    @cached_property
    def fingerprint(self):
        return f"{self.domain.kind}-{self.domain.to_dict()}-n{self.n}"

    def nearest_node(self, p):
        d2 = (self.x - p[0]) ** 2 + (self.y - p[1]) ** 2
        return int(np.argmin(d2))

    def full_array(self, values, fill=0.0):
        out = np.full(self.index.shape, fill, dtype=float)
        out[self.i, self.j] = values
        return out

    def interpolate(self, values, points, exterior: Callable | None = None):
        """Bilinear interpolation of an interior field at arbitrary points.

        Corners that are not interior nodes take ``exterior(x, y)`` (default 0,
        the homogeneous Dirichlet extension).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        full = self.full_array(values)
        if exterior is not None:
            ext = self.index < 0
            ii, jj = np.nonzero(ext)
            full[ii, jj] = exterior(self.origin[0] + ii * self.h, self.origin[1] + jj * self.h)
        s = (pts[:, 0] - self.origin[0]) / self.h
        r = (pts[:, 1] - self.origin[1]) / self.h
        i0 = np.clip(np.floor(s).astype(int), 0, self.nx - 1)
        j0 = np.clip(np.floor(r).astype(int), 0, self.ny - 1)
        fs = s - i0
        fr = r - j0
        out = (
            full[i0, j0] * (1 - fs) * (1 - fr)
            + full[i0 + 1, j0] * fs * (1 - fr)
            + full[i0, j0 + 1] * (1 - fs) * fr
            + full[i0 + 1, j0 + 1] * fs * fr
        )
        return out if np.ndim(points) > 1 else float(out[0])


def build_grid(domain: Domain, n: int) -> Grid:
    """Classify the nodes of an ``n``-cell-wide Cartesian grid over the domain bbox."""
    if n < 16:
        raise ConfigurationError(f"resolution n={n} below the minimum of 16")
    xmin, ymin, xmax, ymax = domain.bbox
    h = (xmax - xmin) / n
    if not h > 0 or not (ymax - ymin) > 0:
        raise DomainError("degenerate domain: empty bounding box")
    nx = n
    ny = int(np.ceil((ymax - ymin) / h - 1e-9))
    xs = xmin + h * np.arange(nx + 1)
    ys = ymin + h * np.arange(ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    inside = domain.signed_distance(X, Y) < -1e-9 * h
    inside[0, :] = inside[-1, :] = False
    inside[:, 0] = inside[:, -1] = False
    ii, jj = np.nonzero(inside)
    if ii.size == 0:
        raise DomainError("degenerate domain: no interior grid nodes")
    index = np.full(inside.shape, -1, dtype=np.int64)
    index[ii, jj] = np.arange(ii.size)
    x = xs[ii]
    y = ys[jj]

    arms = np.ones((ii.size, 4))
    nbr = np.empty((ii.size, 4), dtype=np.int64)
    b_node, b_dir, bx, by = [], [], [], []
    for k, (di, dj) in enumerate(DIRECTIONS):
        nb = index[ii + di, jj + dj]
        nbr[:, k] = nb
        out = np.nonzero(nb < 0)[0]
        if out.size:
            dist = domain.ray_exit(x[out], y[out], (di, dj))
            theta = np.clip(dist / h, 1e-12, 1.0)
            arms[out, k] = theta
            b_node.append(out)
            b_dir.append(np.full(out.size, k))
            bx.append(x[out] + di * theta * h)
            by.append(y[out] + dj * theta * h)
    cat = lambda parts, dt=float: np.concatenate(parts).astype(dt) if parts else np.zeros(0, dt)  # noqa: E731
    b_node = cat(b_node, np.int64)
    order = np.argsort(b_node, kind="stable")
    return Grid(
        domain=domain,
        n=n,
        h=h,
        nx=nx,
        ny=ny,
        origin=(xmin, ymin),
        index=index,
        i=ii,
        j=jj,
        x=x,
        y=y,
        arms=arms,
        nbr=nbr,
        b_node=b_node[order],
        b_dir=cat(b_dir, np.int64)[order],
        bx=cat(bx)[order],
        by=cat(by)[order],
    )


@dataclass(frozen=True, eq=False)
class Coefficient:
    """Positive coefficient a(x) given as a vectorised callable."""

    func: Callable
    family: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, x, y):
        return np.asarray(self.func(np.asarray(x, float), np.asarray(y, float)), dtype=float) * np.ones_like(
            np.asarray(x, float)
        )

    @classmethod
    def constant(cls, value=1.0):
        value = float(value)
        return cls(lambda x, y: np.full(np.shape(x), value), "constant", {"value": value})

    @classmethod
    def exp_x1(cls, c=1.0):
        c = float(c)
        return cls(lambda x, y: np.exp(c * x), "exp_x1", {"c": c})

    @classmethod
    def gaussian_bump(cls, amplitude=0.5, center=(0.0, 0.0), width=0.5, width_y=None):
        """1 + A exp(-(dx/s)^2 - (dy/s_y)^2); radial unless ``width_y`` differs."""
        cx, cy = map(float, center)
        sx = float(width)
        sy = float(width if width_y is None else width_y)
        amp = float(amplitude)
        params = {"amplitude": amp, "center": [cx, cy], "width": sx}
        if width_y is not None:
            params["width_y"] = sy

        def f(x, y):
            return 1.0 + amp * np.exp(-(((x - cx) / sx) ** 2) - ((y - cy) / sy) ** 2)

        return cls(f, "gaussian_bump", params)

    def is_constant(self):
        return self.family == "constant"

    def values(self, grid: Grid):
        return self(grid.x, grid.y)

    def bounds(self, grid: Grid):
        v = np.concatenate([self(grid.x, grid.y), self(grid.bx, grid.by)])
        return float(v.min()), float(v.max())

    def grad_log(self, x, y, step):
        """Centred-difference gradient of log a."""
        gx = (np.log(self(x + step, y)) - np.log(self(x - step, y))) / (2 * step)
        gy = (np.log(self(x, y + step)) - np.log(self(x, y - step))) / (2 * step)
        return gx, gy

    def to_dict(self):
        return {"family": self.family, **self.params}


@dataclass(eq=False)
class DiscreteOperator:
    """Symmetric stiffness K for -div(a grad) with Shortley-Weller arms.

    ``(K u)_i / (a_i w_i)`` approximates ``(-Delta_a u)(x_i)``; rows of
    boundary-adjacent nodes also carry ``b_coef * g`` from boundary data.
    """

    grid: Grid
    coefficient: Coefficient
    K: sp.csr_matrix
    a: np.ndarray
    b_coef: np.ndarray
    solver: str = "direct"
    tol: float = 1e-10
    _lu: object = field(default=None, repr=False)

    @property
    def w(self):
        return self.grid.weights

    @cached_property
    def mass(self):
        return self.a * self.grid.weights

    @property
    def factor(self):
        if self._lu is None:
            self._lu = spla.splu(self.K.tocsc(), permc_spec="MMD_AT_PLUS_A")
        return self._lu

    def boundary_rhs(self, g):
        """Contribution of Dirichlet data to the right-hand side."""
        g = boundary_values(self.grid, g)
        return np.bincount(self.grid.b_node, weights=self.b_coef * g, minlength=self.grid.size)

    def apply(self, u, g=0.0):
        """Discrete -Delta_a u at the interior nodes."""
        return (self.K @ u - self.boundary_rhs(g)) / self.mass

    def energy(self, u, g=0.0):
        """Face-difference quadrature of (1/2) int a |grad u|^2."""
        gb = boundary_values(self.grid, g)
        q = 0.5 * float(u @ (self.K @ u))
        ub = u[self.grid.b_node]
        # boundary arms: K already holds b_coef*u^2 on the diagonal
        return q - float(np.sum(self.b_coef * ub * gb)) + 0.5 * float(np.sum(self.b_coef * gb**2))


def boundary_values(grid, g):
    if callable(g):
        return np.asarray(g(grid.bx, grid.by), dtype=float) * np.ones(grid.n_boundary)
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        return np.full(grid.n_boundary, float(g))
    if g.shape != (grid.n_boundary,):
        raise ConfigurationError("boundary data length does not match the grid")
    return g


def assemble_operator(grid: Grid, a: Coefficient, solver="direct", tol=1e-10) -> DiscreteOperator:
    """Assemble K with arithmetic-mean face coefficients a_f / arm."""
    av = a.values(grid)
    ab = a(grid.bx, grid.by)
    if not (np.all(av > 0) and np.all(ab > 0) and np.all(np.isfinite(av))):
        raise ConfigurationError("coefficient a(x) must be positive on the grid")
    N = grid.size
    rows, cols, vals = [], [], []
    diag = np.zeros(N)
    for k in range(4):
        nb = grid.nbr[:, k]
        inner = nb >= 0
        idx = np.nonzero(inner)[0]
        af = 0.5 * (av[idx] + av[nb[idx]])
        diag[idx] += af
        rows.append(idx)
        cols.append(nb[idx])
        vals.append(-af)
    b_af = 0.5 * (av[grid.b_node] + ab)
    b_coef = b_af / grid.arms[grid.b_node, grid.b_dir]
    np.add.at(diag, grid.b_node, b_coef)
    rows.append(np.arange(N))
    cols.append(np.arange(N))
    vals.append(diag)
    K = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
    K.sum_duplicates()
    return DiscreteOperator(grid, a, K, av, b_coef, solver=solver, tol=tol)


def solve_dirichlet(op: DiscreteOperator, f, g=0.0):
    """Solve -Delta_a u = f in the domain, u = g on the boundary."""
    f = np.asarray(f, dtype=float) * np.ones(op.grid.size)
    if not np.all(np.isfinite(f)):
        raise ConfigurationError("right-hand side contains non-finite values")
    rhs = op.mass * f + op.boundary_rhs(g)
    return solve_stiffness(op, rhs)


def solve_stiffness(op: DiscreteOperator, rhs):
    """Solve K u = rhs with the configured linear solver."""
    norm = np.linalg.norm(rhs)
    if norm == 0.0:
        return np.zeros_like(rhs)
    if op.solver == "cg":
        d = op.K.diagonal()
        pre = spla.LinearOperator(op.K.shape, matvec=lambda v: v / d)
        u, info = spla.cg(op.K, rhs, rtol=op.tol, atol=0.0, M=pre, maxiter=20 * op.grid.size)
        if info != 0:
            raise NumericalError("conjugate gradient did not converge", {"info": int(info)})
    else:
        u = op.factor.solve(rhs)
    res = np.linalg.norm(op.K @ u - rhs) / norm
    if not np.isfinite(res) or res > max(op.tol, 1e-8) * 10:
        raise NumericalError("linear solve residual above tolerance", {"relative_residual": float(res)})
    return u


# ---------------------------------------------------------------- quadrature


def _edge_power_integral(qx, qy, ax, ay, bx, by, p):
    """Signed integral of |x - q|^p over the triangle (q, A, B)."""
    ex, ey = bx - ax, by - ay
    length = np.hypot(ex, ey)
    tx, ty = ex / length, ey / length
    # signed distance of q to the line and positions of A, B from the foot point
    d = abs((ax - qx) * ty - (ay - qy) * tx)
    if d < 1e-300:
        return 0.0
    sa = (ax - qx) * tx + (ay - qy) * ty
    sb = sa + length
    beta = 0.5 * p

    def prim(s):
        return s * d ** (2 * beta) * hyp2f1(0.5, -beta, 1.5, -(s * s) / (d * d))

    cross = (ax - qx) * (by - qy) - (ay - qy) * (bx - qx)
    return np.sign(cross) * d / (p + 2.0) * (prim(sb) - prim(sa))


def cell_power_integral(x0, x1, y0, y1, q, p):
    """Exact integral of |x - q|^p over the box [x0,x1]x[y0,y1], p > -2."""
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    total = 0.0
    for k in range(4):
        (ax, ay), (bx, by) = corners[k], corners[(k + 1) % 4]
        total += _edge_power_integral(q[0], q[1], ax, ay, bx, by, p)
    return float(total)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodal weights; with a marked center q they integrate |x-q|^exponent * f.

    ``factor`` is the cell average of the singular weight (``weights / area``),
    used wherever the weight enters nodal equations.
    """

    grid: Grid
    weights: np.ndarray
    factor: np.ndarray
    center: tuple[float, float] | None = None
    exponent: float = 0.0
    near_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


def make_quadrature(grid: Grid, center=None, exponent=0.0, near=3.0) -> QuadratureRule:
    w = grid.weights
    if center is None or exponent == 0.0:
        return QuadratureRule(grid, w.copy(), np.ones_like(w), center, float(exponent))
    if exponent <= -2.0:
        raise ConfigurationError("singular exponent must exceed -2")
    qx, qy = map(float, center)
    r = np.hypot(grid.x - qx, grid.y - qy)
    with np.errstate(divide="ignore"):
        factor = np.where(r > 0, r, 1.0) ** exponent
    near_nodes = np.nonzero(r <= near * grid.h)[0]
    h2 = 0.5 * grid.h
    for idx in near_nodes:
        cx, cy = grid.x[idx], grid.y[idx]
        # arms are full this close to an interior center; clip anyway
        x0 = cx - h2 * grid.arms[idx, 1]
        x1 = cx + h2 * grid.arms[idx, 0]
        y0 = cy - h2 * grid.arms[idx, 3]
        y1 = cy + h2 * grid.arms[idx, 2]
        factor[idx] = cell_power_integral(x0, x1, y0, y1, (qx, qy), exponent) / w[idx]
    return QuadratureRule(grid, w * factor, factor, (qx, qy), float(exponent), near_nodes)


def integrate(values, rule: QuadratureRule) -> float:
    """Sum of weights * values; a marked center supplies the singular factor."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        values = np.full(rule.grid.size, float(values))
    if values.shape != rule.weights.shape:
        raise ConfigurationError("field and quadrature rule live on different grids")
    return float(rule.weights @ values)
