import numpy as np
import pytest
from scipy.special import jn_zeros

from liouville_bubbles.discretization import Coefficient, Domain, assemble_operator, build_grid
from liouville_bubbles.errors import ConfigurationError, DomainError
from liouville_bubbles.green import GreenTable, background
from liouville_bubbles.spectral import check_assumption_a, first_eigenpair, rayleigh_quotient

DISC = Domain.disc(1.0, (0.0, 0.0))
ONE = Coefficient.constant(1.0)


@pytest.fixture(scope="module")
def disc_op():
    return assemble_operator(build_grid(DISC, 96), ONE)


def test_disc_eigenvalue_bessel_oracle(disc_op):
    eig = first_eigenpair(disc_op)
    assert eig.lam == pytest.approx(jn_zeros(0, 1)[0] ** 2, rel=5e-3)


def test_square_eigenvalue():
    op = assemble_operator(build_grid(Domain.rectangle((0, 0), (1, 1)), 64), ONE)
    assert first_eigenpair(op).lam == pytest.approx(2 * np.pi**2, rel=5e-3)


def test_eigenfunction_normalised_positive(disc_op):
    eig = first_eigenpair(disc_op)
    assert eig.phi.max() == pytest.approx(1.0)
    assert eig.phi.min() > 0
    assert rayleigh_quotient(disc_op, eig.phi) == pytest.approx(eig.lam, rel=1e-8)


def test_eigenvalue_scales_with_domain():
    small = assemble_operator(build_grid(Domain.disc(0.5), 96), ONE)
    big = assemble_operator(build_grid(DISC, 96), ONE)
    assert first_eigenpair(small).lam == pytest.approx(4 * first_eigenpair(big).lam, rel=1e-3)


def test_assumption_a_disc_centre(disc_op):
    rep = check_assumption_a(disc_op, first_eigenpair(disc_op), (0.0, 0.0), 0.5)
    assert rep.holds


def test_assumption_a_fails_off_centre(disc_op):
    rep = check_assumption_a(disc_op, first_eigenpair(disc_op), (0.3, 0.0), 0.4)
    assert not rep.holds


def test_assumption_a_ball_outside_domain(disc_op):
    with pytest.raises(DomainError):
        check_assumption_a(disc_op, first_eigenpair(disc_op), (0.5, 0.0), 0.6)


def image_H(x, y):
    # unit disc, a = 1: H(x, y) = 4 log(|y| |x - y*|), y* = y / |y|^2
    y = np.asarray(y, float)
    ys = y / (y @ y)
    return 4.0 * np.log(np.hypot(*y) * np.hypot(x[..., 0] - ys[0], x[..., 1] - ys[1]))


@pytest.mark.parametrize("y", [(0.3, 0.1), (-0.5, 0.2), (0.0, 0.6)])
def test_regular_part_image_charge(disc_op, y):
    g = disc_op.grid
    H = GreenTable(disc_op).add(y)
    exact = image_H(np.c_[g.x, g.y], y)
    assert np.abs(H - exact).max() < 5e-3


def test_robin_function_disc(disc_op):
    t = GreenTable(disc_op)
    y = (0.4, -0.2)
    t.add(y)
    assert t.robin(y) == pytest.approx(4 * np.log(1 - 0.2), abs=5e-3)


def test_green_symmetric_for_constant_a(disc_op):
    t = GreenTable(disc_op)
    x, y = (0.2, 0.3), (-0.4, 0.1)
    t.add(x), t.add(y)
    assert t.value(x, y) == pytest.approx(t.value(y, x), rel=1e-3)


def test_pole_near_boundary_rejected(disc_op):
    with pytest.raises(DomainError):
        GreenTable(disc_op).add((0.999, 0.0))


def test_green_singular_value_rejected(disc_op):
    t = GreenTable(disc_op)
    t.add((0.1, 0.1))
    with pytest.raises(ConfigurationError):
        t.value((0.1, 0.1), (0.1, 0.1))


def test_background_k_formula(disc_op):
    t = GreenTable(disc_op)
    bg = background(disc_op, t, 0.0, (0.0, 0.0), 0.5)
    # with h = 0 and H(., 0) = 0 on the unit disc, k = 1
    assert np.allclose(bg.k, 1.0, atol=1e-10)
    assert bg.log_k_q == pytest.approx(0.0, abs=1e-10)


def test_eigenpair_invariant_under_coefficient_scaling():
    g = build_grid(DISC, 48)
    a = Coefficient.exp_x1(0.8)
    scaled = Coefficient(lambda x, y: 3.0 * np.exp(0.8 * x))
    e1 = first_eigenpair(assemble_operator(g, a))
    e2 = first_eigenpair(assemble_operator(g, scaled))
    assert e2.lam == pytest.approx(e1.lam, rel=1e-8)
    assert np.allclose(e2.phi, e1.phi, atol=1e-6)


def test_eigenvalues_settle_under_refinement():
    lams = [first_eigenpair(assemble_operator(build_grid(DISC, n), ONE)).lam for n in (32, 64, 128)]
    steps = np.abs(np.diff(lams))
    assert steps[1] < steps[0]


def test_green_value_at_half_radius(disc_op):
    t = GreenTable(disc_op)
    t.add((0.0, 0.0))
    assert t.value((0.5, 0.0), (0.0, 0.0)) == pytest.approx(4 * np.log(2.0), abs=2e-2)


def test_green_singularity_normalisation():
    op = assemble_operator(build_grid(DISC, 128), Coefficient.exp_x1(0.5))
    g = op.grid
    y = (0.1, -0.2)
    t = GreenTable(op)
    t.add(y)
    G = t.G_field(y)
    r = np.hypot(g.x - y[0], g.y - y[1])
    ring = (r >= 5 * g.h) & (r <= 10 * g.h)
    c, _ = np.polyfit(-np.log(r[ring]), G[ring], 1)
    assert c == pytest.approx(4.0, rel=5e-2)


def test_green_positive(disc_op):
    g = disc_op.grid
    y = (0.3, 0.2)
    t = GreenTable(disc_op)
    t.add(y)
    G = t.G_field(y)
    assert np.all(G[np.hypot(g.x - y[0], g.y - y[1]) > 0] > 0)


def test_background_from_eigenfunction(disc_op):
    eig = first_eigenpair(disc_op)
    bg = background(disc_op, GreenTable(disc_op), eig.lam * eig.phi, (0.0, 0.0), 0.0)
    assert bg.rho.max() == pytest.approx(1.0, abs=1e-6)
