import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liouville_bubbles.ansatz import (
    assemble,
    build_problem,
    corrections,
    in_configuration_space,
    make_config,
    profile,
    profile_gradient,
    star_norm,
    star_weight,
    validate_alpha,
)
from liouville_bubbles.discretization import Coefficient, Domain
from liouville_bubbles.errors import ConfigurationError, DomainError, ResolutionError

DISC = Domain.disc(1.0, (0.0, 0.0))
ONE = Coefficient.constant(1.0)


@pytest.fixture(scope="module")
def p0():
    return build_problem(DISC, ONE, 96, 0.0, q=(0.0, 0.0), d=0.6, t=4.0, m=0)


@pytest.fixture(scope="module")
def p1():
    return build_problem(DISC, ONE, 96, 0.5, q=(0.0, 0.0), d=0.6, t=6.0, m=1)


@pytest.mark.parametrize("alpha", [2.0, 1.0, -1.0, -1.5])
def test_validate_alpha_rejects(alpha):
    with pytest.raises(ConfigurationError):
        validate_alpha(alpha)


@pytest.mark.parametrize("alpha", [0.0, 0.5, -0.5, 1.5, 2.5])
def test_validate_alpha_accepts(alpha):
    assert validate_alpha(alpha) == alpha


def test_mu0_unit_disc_alpha_zero(p0):
    # H(., 0) = 0 and k = 1 give 8 mu0^2 = 1
    assert make_config(p0).mu0 == pytest.approx(1 / np.sqrt(8), rel=1e-10)


def test_mu1_unit_disc_frozen(p1):
    # frozen from the closed-form disc Green function at xi = (0.5, 0)
    c = make_config(p1, [[0.5, 0.0]])
    R = 4 * np.log(1 - 0.25)
    G = 4 * np.log(2.0)  # H(., 0) vanishes on the unit disc
    mu1 = np.sqrt(0.5 ** (2 * 0.5) * np.exp(R + 1.5 * G) / 8.0)
    assert mu1 == pytest.approx(1.125)
    assert c.k_xi[0] == pytest.approx(1.0, abs=1e-8)
    assert c.mu[0] == pytest.approx(mu1, rel=1e-4)


def test_profile_solves_singular_liouville(p1):
    # -Delta u0 = |x|^{2 alpha} k eps0^2 e^{u0} away from q, checked by central differences
    c = make_config(p1, [[0.5, 0.0]])
    x, y, h = 0.05, 0.03, 1e-4
    u = lambda a, b: profile(c, 0, np.array([a]), np.array([b]))[0]  # noqa: E731
    lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u(x, y)) / h**2
    rhs = np.hypot(x, y) ** (2 * 0.5) * c.k_q * c.eps0**2 * np.exp(u(x, y))
    assert -lap == pytest.approx(rhs, rel=1e-4)


def test_xi_profile_solves_liouville(p1):
    c = make_config(p1, [[0.5, 0.0]])
    x, y, h = 0.52, -0.01, 1e-4
    u = lambda a, b: profile(c, 1, np.array([a]), np.array([b]))[0]  # noqa: E731
    lap = (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4 * u(x, y)) / h**2
    rhs = c.eps[0] ** 2 * c.k_xi[0] * c.dist_q[0] ** (2 * 0.5) * np.exp(u(x, y))
    assert -lap == pytest.approx(rhs, rel=1e-4)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-0.8, 0.8), y=st.floats(-0.8, 0.8), i=st.integers(0, 1))
def test_profile_gradient_matches_differences(p1, x, y, i):
    c = make_config(p1, [[0.5, 0.0]])
    if np.hypot(x, y) < 1e-2:
        return
    h = 1e-6
    f = lambda a, b: profile(c, i, np.array([a]), np.array([b]))[0]  # noqa: E731
    gx, gy = profile_gradient(c, i, np.array([x]), np.array([y]))
    assert gx[0] == pytest.approx((f(x + h, y) - f(x - h, y)) / (2 * h), rel=1e-4, abs=1e-6)
    assert gy[0] == pytest.approx((f(x, y + h) - f(x, y - h)) / (2 * h), rel=1e-4, abs=1e-6)


def test_exact_corrections_cancel_boundary_trace(p1):
    c = make_config(p1, [[0.5, 0.0]])
    f = assemble(c)
    assert np.abs(f.U_trace).max() < 1e-10


def test_leading_equals_exact_for_constant_a_up_to_bubble_tail(p1):
    c = make_config(p1, [[0.5, 0.0]])
    ex, _ = corrections(c, "exact")
    le, _ = corrections(c, "leading")
    # difference is the harmonic extension of 2 log(1 + core^2/|b - xi|^2)-type tails
    assert np.abs(ex[0] - le[0]).max() < 0.05


def test_resolution_guard(p1):
    c = make_config(p1.at(t=20.0), [[0.5, 0.0]])
    with pytest.raises(ResolutionError):
        c.check_resolution()


def test_xi_equal_q_rejected(p1):
    with pytest.raises(ConfigurationError):
        make_config(p1, [[0.0, 0.0]])


def test_xi_near_boundary_rejected(p1):
    with pytest.raises(DomainError):
        make_config(p1, [[0.995, 0.0]])


def test_wrong_number_of_points(p1):
    with pytest.raises(ConfigurationError):
        make_config(p1, [])


def test_configuration_space_margins(p1):
    ok, margins = in_configuration_space(p1, [[0.4, 0.0]])
    names = [m["constraint"] for m in margins]
    assert names == ["ball[0]", "level[0]", "dist_q[0]"]
    assert margins[0]["slack"] == pytest.approx(0.2)
    ok_far, _ = in_configuration_space(p1, [[0.7, 0.0]])
    assert not ok_far


def test_configuration_space_vacuous_for_m0(p0):
    assert in_configuration_space(p0, []) == (True, [])


@settings(max_examples=20, deadline=None)
@given(scale=st.floats(-50, 50))
def test_star_norm_homogeneous(p1, scale):
    c = make_config(p1, [[0.5, 0.0]])
    f = np.cos(3 * p1.grid.x) + p1.grid.y
    assert star_norm(scale * f, c) == pytest.approx(abs(scale) * star_norm(f, c), rel=1e-12, abs=1e-300)


def test_star_norm_triangle(p1):
    c = make_config(p1, [[0.5, 0.0]])
    f, g = np.sin(p1.grid.x), np.exp(p1.grid.y)
    assert star_norm(f + g, c) <= star_norm(f, c) + star_norm(g, c) + 1e-12


def test_star_weight_positive(p1):
    assert np.all(star_weight(make_config(p1, [[0.5, 0.0]])) > 0)
