import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st

from liouville_bubbles.ansatz import assemble, build_problem, make_config
from liouville_bubbles.discretization import Coefficient, Domain
from liouville_bubbles.errors import ConfigurationError
from liouville_bubbles.reduction import (
    ProjectedSolver,
    asymptotic_contraction,
    build_basis,
    nonlinear_term,
    ramp,
    solve_inner,
    solve_inner_newton,
    z_dilation,
    z_dilation_q,
    z_translation,
)

DISC = Domain.disc(1.0, (0.0, 0.0))


@pytest.fixture(scope="module")
def p1():
    return build_problem(DISC, Coefficient.constant(1.0), 64, 0.5, q=(0.0, 0.0), d=0.6, t=6.0, m=1)


@pytest.fixture(scope="module")
def p0():
    return build_problem(DISC, Coefficient.constant(1.0), 96, 0.5, q=(0.0, 0.0), d=0.6, t=6.0, m=0)


@pytest.mark.parametrize("kind", ["quintic", "cosine"])
def test_ramp_endpoints_and_monotone(kind):
    s = np.linspace(-0.5, 1.5, 401)
    r = ramp(s, kind)
    assert r[0] == 1.0 and r[-1] == 0.0
    assert np.all(np.diff(r) <= 1e-15)


def test_quintic_ramp_is_c2():
    h = 1e-4
    for s0 in (0.0, 1.0):
        d1 = (ramp(s0 + h) - ramp(s0 - h)) / (2 * h)
        d2 = (ramp(s0 + h) - 2 * ramp(s0) + ramp(s0 - h)) / h**2
        assert abs(d1) < 1e-6 and abs(d2) < 1e-2


def test_unknown_ramp():
    with pytest.raises(ConfigurationError):
        ramp(0.5, "linear")


def lap(f, z1, z2, h=1e-4):
    return (f(z1 + h, z2) + f(z1 - h, z2) + f(z1, z2 + h) + f(z1, z2 - h) - 4 * f(z1, z2)) / h**2


@settings(max_examples=30, deadline=None)
@given(z1=st.floats(-3, 3), z2=st.floats(-3, 3))
def test_kernel_of_regular_linearisation(z1, z2):
    w = 8.0 / (1 + z1 * z1 + z2 * z2) ** 2
    for f in (lambda a, b: z_translation(a, b, 1), lambda a, b: z_translation(a, b, 2), z_dilation):
        assert lap(f, z1, z2) + w * f(z1, z2) == pytest.approx(0.0, abs=2e-4)


@settings(max_examples=30, deadline=None)
@given(z1=st.floats(0.2, 3), z2=st.floats(0.2, 3), alpha=st.sampled_from([-0.5, 0.5, 1.5]))
def test_kernel_of_singular_linearisation(z1, z2, alpha):
    r2 = z1 * z1 + z2 * z2
    w = 8 * (1 + alpha) ** 2 * r2**alpha / (1 + r2 ** (1 + alpha)) ** 2
    f = lambda a, b: z_dilation_q(a, b, alpha)  # noqa: E731
    assert lap(f, z1, z2) + w * f(z1, z2) == pytest.approx(0.0, abs=5e-4)


@settings(max_examples=30, deadline=None)
@given(phi=st.floats(-1e-3, 1e-3), W=st.floats(0.1, 10))
def test_nonlinear_term_quadratic(phi, W):
    assert nonlinear_term(np.array([phi]), np.array([W]))[0] == pytest.approx(0.5 * W * phi**2, rel=1e-3, abs=1e-18)


def test_bordered_solve_matches_direct_saddle(p1):
    c = make_config(p1, [[0.4, 0.0]])
    f = assemble(c)
    T = ProjectedSolver(c, f.W)
    g = p1.grid
    h = np.cos(2 * g.x) * np.sin(3 * g.y)
    s = T.solve(h)
    B = T.B
    kkt = sp.bmat([[T.L, -sp.csr_matrix(B)], [sp.csr_matrix(B.T), None]]).tocsc()
    rhs = np.concatenate([p1.op.mass * h, np.zeros(B.shape[1])])
    sol = spla.spsolve(kkt, rhs)
    assert np.abs(s.phi - sol[: g.size]).max() <= 1e-9 * max(1.0, np.abs(sol).max())
    assert np.allclose(s.c_x.ravel(), sol[g.size:], rtol=1e-7, atol=1e-12)
    assert s.constraint_residual <= 1e-10


def test_projected_solver_linear_and_zero(p1):
    c = make_config(p1, [[0.4, 0.0]])
    T = ProjectedSolver(c, assemble(c).W)
    g = p1.grid
    a, b = np.sin(g.x), g.y**2
    sa, sb, sab = T.solve(a), T.solve(b), T.solve(2 * a - 3 * b)
    assert np.abs(sab.phi - (2 * sa.phi - 3 * sb.phi)).max() <= 1e-8 * sab.phi_sup
    z = T.solve(np.zeros(g.size))
    assert z.phi_sup == 0.0 and np.all(z.c == 0)


def test_overlapping_supports_rejected():
    p = build_problem(DISC, Coefficient.constant(1.0), 48, 0.5, q=(0.0, 0.0), d=0.6, t=4.0, m=2)
    c = make_config(p, [[0.3, 0.0], [-0.3, 0.0]])
    with pytest.raises(ConfigurationError, match="R0 <"):
        build_basis(c)


def test_fixed_point_and_newton_agree(p0):
    f = assemble(make_config(p0))
    fp = solve_inner(f, maxiter=200)
    nt = solve_inner_newton(f)
    assert fp.converged and nt.converged
    assert np.abs(fp.phi - nt.phi).max() < 1e-8
    assert 0 < asymptotic_contraction(fp) < 1


def test_discrete_inner_solution_solves_full_problem(p0):
    # with m = 0 there are no multipliers, so U + phi solves the discrete equation
    from liouville_bubbles.full_solver import residual
    f = assemble(make_config(p0))
    s = solve_inner_newton(f, tol=1e-12)
    assert np.abs(residual(f.U + s.phi, p0)).max() < 1e-8 * np.abs(f.W).max()
