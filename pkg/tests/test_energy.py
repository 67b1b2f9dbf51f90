import numpy as np
import pytest

from liouville_bubbles.ansatz import build_problem, in_configuration_space
from liouville_bubbles.discretization import Coefficient, Domain
from liouville_bubbles.energy import (
    ReducedEnergy,
    energy_Jt,
    expansion_Jt,
    fd_gradient,
    initial_polygon,
    maximize,
    ring,
    sweep_header,
)
from liouville_bubbles.errors import ConfigurationError, NumericalError

DISC = Domain.disc(1.0, (0.0, 0.0))


@pytest.fixture(scope="module")
def p1():
    return build_problem(DISC, Coefficient.constant(1.0), 96, 0.5, q=(0.0, 0.0), d=0.6, t=12.0, m=1)


def test_dirichlet_energy_of_paraboloid(p1):
    # u = 1 - r^2: (1/2) int |grad u|^2 = pi on the unit disc
    g = p1.grid
    assert p1.op.energy(1 - g.x**2 - g.y**2, 0.0) == pytest.approx(np.pi, rel=1e-2)


def test_energy_with_trace_matches_shifted(p1):
    g = p1.grid
    u = np.sin(g.x) * g.y
    # adding a constant c to u with trace c leaves the gradient energy unchanged
    assert p1.op.energy(u + 2.0, 2.0) == pytest.approx(p1.op.energy(u, 0.0), rel=1e-10)


def test_energy_overflow_reports_location(p1):
    u = np.zeros(p1.grid.size)
    u[10] = 800.0
    with pytest.raises(NumericalError) as exc:
        energy_Jt(u, p1)
    assert exc.value.diagnostics["u"] == 800.0


def test_expansion_m1_by_hand(p1):
    xi = np.array([[0.3, 0.4]])
    t, a = p1.t, 1.0
    phi = float(np.ravel(p1.phi_at(xi))[0])
    expected = 8 * np.pi * 1.5 * t * a * p1.phi_q
    expected += 8 * np.pi * t * a * phi + 16 * np.pi * 2.5 * a * np.log(0.5)
    # the q term uses a(q) only, matching the max-normalised phi_1(q) = 1
    assert p1.phi_q == pytest.approx(1.0, abs=1e-6)
    assert expansion_Jt(xi, p1) == pytest.approx(expected, rel=1e-12)


def test_expansion_rejects_q(p1):
    with pytest.raises(ConfigurationError):
        expansion_Jt([[0.0, 0.0]], p1)


def test_initial_polygon_geometry():
    p = build_problem(DISC, Coefficient.constant(1.0), 48, 0.5, q=(0.0, 0.0), d=0.6, t=100.0, m=3)
    poly = initial_polygon(p)
    assert np.allclose(np.hypot(*poly.T), 0.1)
    assert np.allclose(np.arctan2(poly[:, 1], poly[:, 0]) % (2 * np.pi), [0, 2 * np.pi / 3, 4 * np.pi / 3])
    with pytest.raises(ConfigurationError):
        initial_polygon(p.at(t=1.0))


def test_fd_gradient_quadratic():
    g = fd_gradient(lambda xi: float(np.sum(xi**2)), np.array([[0.3, -0.2]]), 1e-4)
    assert np.allclose(g, [0.6, -0.4], atol=1e-8)


def test_reduced_energy_cache(p1):
    F = ReducedEnergy(p1)
    a = F.evaluate([[0.4, 0.1]], with_phi=False)
    b = F.evaluate([[0.4 + 1e-9, 0.1]], with_phi=False)
    assert a is b
    assert len(F.samples()) == 1
    assert len(a.row()) == len(sweep_header(1))


def test_ring_points(p1):
    pts = ring(p1, 0.4, 8)
    assert len(pts) == 8
    assert np.allclose([np.hypot(*x[0]) for x in pts], 0.4)


def test_maximize_stage_one_ascent(p1):
    # on this coarse grid the inner problem is unsolved near the maximiser, so
    # the report falls back to J_t(U) and says so
    F = ReducedEnergy(p1)
    rep = maximize(p1, F)
    ok, _ = in_configuration_space(p1, rep.xi_t)
    assert ok and rep.interior and not rep.pinned
    if rep.value_kind == "J_t(U)":
        assert rep.c_max is None
        J = lambda xi: F(xi, with_phi=False)  # noqa: E731
        v = J(np.array(rep.xi_t))
        assert v == pytest.approx(rep.value, rel=1e-12)
        for d in ([0.01, 0.0], [-0.01, 0.0], [0.0, 0.01], [0.0, -0.01]):
            assert J(np.array(rep.xi_t) + d) <= v
    else:
        assert rep.c_max < 1e-3


def test_radial_critical_point_needs_one_bubble():
    from liouville_bubbles.energy import radial_critical_point
    p = build_problem(Domain.disc(1.0), Coefficient.constant(1.0), 48, 0.5, q=(0.0, 0.0), d=0.6, t=4.0, m=0)
    with pytest.raises(ConfigurationError):
        radial_critical_point(p, 0.2, 0.5)
