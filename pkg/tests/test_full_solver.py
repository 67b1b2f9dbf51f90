import numpy as np
import pytest

from liouville_bubbles.ansatz import build_problem
from liouville_bubbles.discretization import Coefficient, Domain, build_grid
from liouville_bubbles.full_solver import (
    ansatz_seed,
    bubble_report,
    continuation,
    find_peaks,
    mass_check,
    newton_solve,
    reconstruct_v,
    residual,
)

DISC = Domain.disc(1.0, (0.0, 0.0))


@pytest.fixture(scope="module")
def p0():
    return build_problem(DISC, Coefficient.constant(1.0), 128, 0.5, q=(0.0, 0.0), d=0.6, t=5.0, m=0)


@pytest.fixture(scope="module")
def solved(p0):
    fields, phi, info = ansatz_seed(p0, [])
    return newton_solve(fields.U + phi, p0, tol=1e-9), fields, phi


def test_m0_inner_solution_is_already_exact(solved):
    # without multipliers U + phi solves the discrete problem, so Newton stops at once
    rep, _, _ = solved
    assert rep.converged and len(rep.log) == 1


def test_newton_converges_quadratically_from_U(p0, solved):
    _, fields, phi = solved
    rep = newton_solve(fields.U, p0, tol=1e-9)
    assert rep.converged
    assert np.abs(rep.u - (fields.U + phi)).max() < 1e-7
    # ||F_{k+1}|| / ||F_k||^2 stays bounded over the final full steps
    full = [e["ratio"] for e in rep.log[1:] if e["damping"] == 1.0]
    assert len(full) >= 2 and max(full[-2:]) < 10.0


def test_solution_satisfies_discrete_equation(solved, p0):
    rep, _, _ = solved
    assert np.abs(residual(rep.u, p0)).max() <= 1e-9


def test_mass_identity(solved, p0):
    # summing the discrete equation: mass equals the total flux sum(K u)
    rep, _, _ = solved
    M, pred, rel = mass_check(rep.u, p0)
    assert M == pytest.approx(float(np.sum(p0.op.K @ rep.u)), rel=1e-8)
    assert pred == pytest.approx(8 * np.pi * 1.5 * p0.a_q * p0.phi_q)
    assert rel == pytest.approx(abs(M - pred) / pred)


def test_single_peak_at_q(solved, p0):
    rep, _, _ = solved
    b = rep.bubbles
    assert b["count"] == 1 and b["q_peak_within_2h"] and b["structure_ok"]


def test_reconstruct_v_nan_at_q(solved, p0):
    rep, _, _ = solved
    v = reconstruct_v(rep.u, p0)
    pole = p0.grid.nearest_node(p0.q)
    assert np.isnan(v[pole])
    assert np.isfinite(np.delete(v, pole)).all()


def test_find_peaks_synthetic():
    g = build_grid(Domain.rectangle((0, 0), (1, 1)), 64)
    u = np.exp(-((g.x - 0.3) ** 2 + (g.y - 0.3) ** 2) / 0.005) + 0.8 * np.exp(
        -((g.x - 0.7) ** 2 + (g.y - 0.6) ** 2) / 0.005)
    peaks = find_peaks(u, g)
    assert len(peaks) == 2
    assert np.hypot(g.x[peaks[0]] - 0.3, g.y[peaks[0]] - 0.3) < 2 * g.h
    assert np.hypot(g.x[peaks[1]] - 0.7, g.y[peaks[1]] - 0.6) < 2 * g.h
    assert find_peaks(np.zeros(g.size), g) == []


def test_bubble_report_counts_and_spacing(p0):
    p = p0.at(m=1)
    g = p.grid
    u = 5 * np.exp(-(g.x**2 + g.y**2) / 0.002) + 4 * np.exp(-((g.x - 0.4) ** 2 + g.y**2) / 0.002)
    b = bubble_report(u, p)
    assert b["count"] == 2 and b["expected"] == 2
    assert b["pairwise_distances"][0] == pytest.approx(0.4, abs=2 * g.h)
    assert b["inside_ball"] and b["spacing_ok"]


def test_continuation_transport_seed(p0):
    out = continuation([5.0, 5.5], p0, resolution_factor=2.0)
    assert [e["report"].converged for e in out] == [True, True]
    assert out[1]["report"].extra["seed"] == "transport"
    errs = [e["report"].mass_rel_error for e in out]
    assert errs[1] < errs[0]


def test_continuation_resolution_guard(p0):
    out = continuation([40.0], p0)
    assert out[0]["error"].startswith("ResolutionError")
