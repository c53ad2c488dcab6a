import numpy as np
import pytest

from hybridbem.geometry import WaveParams, discretize_circle
from hybridbem.halfspace import (
    HalfspaceProblem,
    SolverError,
    assemble_and_solve,
    boundary_residuals,
    eval_total_field,
    lu_solve,
    make_wall,
    scatterer_trace,
    solve_halfspace_empty,
    solve_hybrid,
)
from hybridbem.oracles import image_bem_scatterer, image_field_empty, relative_error
from hybridbem.sommerfeld import TruncationParams

K = 2.0
WAVE = WaveParams.from_k(K)
TRUNC = TruncationParams(M0=12.0, N0=12.0, a=2.0)


def _problem(scatterers=(), source=(1.0, 3.0), beta=None, ppw=20, extent=3.0):
    wall = make_wall(TRUNC.M0, K, ppw)
    return HalfspaceProblem(WAVE, np.array(source), wall, scatterers, TRUNC, beta=beta, extent=extent)


def _grid(n=7):
    x, y = np.meshgrid(np.linspace(-3, 3, n), np.linspace(0.3, 4.5, n))
    return np.column_stack([x.ravel(), y.ravel()])


@pytest.fixture(scope="module")
def circle_problem():
    circ = discretize_circle([0.0, 2.0], 0.5, 64)
    prob = _problem([circ], source=(1.2, 3.5))
    return prob, assemble_and_solve(prob)


def test_make_wall():
    w = make_wall(5.0, 2.0, 10, breakpoints=(0.3, 7.0))
    assert np.isclose(w.p0[0, 0], -5) and np.isclose(w.p1[-1, 0], 5)
    assert np.any(np.isclose(w.p0[:, 0], 0.3))
    assert np.all(w.p0[:, 1] == 0) and np.all(w.normals == [0, 1])
    np.testing.assert_allclose(w.p1[:-1], w.p0[1:])


def test_empty_closed_form_matches_image_field():
    prob = _problem()
    sol = solve_halfspace_empty(WAVE, prob.source, TRUNC, prob.wall, prob.rule)
    pts = _grid()
    err = relative_error(eval_total_field(prob, sol, pts), image_field_empty(prob.source, K, pts))
    assert err <= 1e-5


def test_assembled_empty_matches_closed_form():
    prob = _problem()
    a = assemble_and_solve(prob)
    b = solve_halfspace_empty(WAVE, prob.source, TRUNC, prob.wall, prob.rule)
    np.testing.assert_allclose(a.sigma_wall, b.sigma_wall, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(a.xi, b.xi, rtol=1e-8, atol=1e-10)


def test_scatterer_matches_image_bem(circle_problem):
    prob, sol = circle_problem
    pts = _grid()
    pts = pts[np.hypot(pts[:, 0], pts[:, 1] - 2) > 0.7]
    ref = image_bem_scatterer(prob.scatterers[0], prob.source, K, points=pts)
    assert relative_error(eval_total_field(prob, sol, pts), ref) <= 2e-3


def test_schur_and_dense_agree():
    circ = discretize_circle([0.0, 2.0], 0.5, 24)
    prob = _problem([circ], ppw=8)
    a = assemble_and_solve(prob, "schur")
    b = assemble_and_solve(prob, "dense")
    np.testing.assert_allclose(a.sigma_scat, b.sigma_scat, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(a.xi, b.xi, rtol=1e-8, atol=1e-10)
    with pytest.raises(ValueError):
        assemble_and_solve(prob, "qr")


def test_mirror_symmetry():
    circ = discretize_circle([0.0, 2.0], 0.5, 48)
    prob = _problem([circ], source=(0.0, 3.5))
    sol = assemble_and_solve(prob)
    pts = np.array([[0.8, 1.0], [2.0, 3.0], [1.5, 0.4]])
    left = eval_total_field(prob, sol, pts * [-1, 1])
    right = eval_total_field(prob, sol, pts)
    assert np.max(np.abs(left - right) / np.abs(right)) <= 1e-6


def test_trace_continuity_and_residuals(circle_problem):
    prob, sol = circle_problem
    r_wall, r_scat = boundary_residuals(prob, sol, eps=1e-4)
    assert len(r_wall) == len(prob.wall) and len(r_scat) == len(prob.scatterers[0])
    scale = np.max(np.abs(scatterer_trace(prob, sol)))
    assert np.max(r_scat) <= 1e-2 * scale
    mid = np.abs(prob.wall.midpoints[:, 0]) < 3
    assert np.max(r_wall[mid]) <= 1e-2 * scale


def test_beta_sign_agreement_converges():
    pts = np.array([[0.5, 0.5], [-1.0, 3.0], [2.0, 2.0]])
    diffs = []
    for n in (48, 96):
        circ = discretize_circle([0.0, 2.0], 0.5, n)
        u = [eval_total_field(p, assemble_and_solve(p), pts)
             for p in (_problem([circ], beta=-1j / K), _problem([circ], beta=1j / K))]
        diffs.append(np.max(np.abs(u[0] - u[1]) / np.abs(u[1])))
    assert diffs[1] <= 1e-2
    assert diffs[1] <= 0.6 * diffs[0]


def test_zero_beta_degrades_at_interior_eigenvalue():
    # k r = j_{0,1} is an interior Dirichlet eigenvalue of the disc: the
    # uncoupled equation loses conditioning there, the coupled one does not.
    circ = discretize_circle([0.0, 2.0], 1.0, 48)
    trunc = TruncationParams(8.0, 8.0, 2.0)
    rc = {}
    for k in (2.0, 2.404825557695773):
        wall = make_wall(8.0, k, 10)
        for beta in (0.0, -1j / k):
            p = HalfspaceProblem(WaveParams.from_k(k), [0.0, 4.0], wall, [circ], trunc, beta=beta, extent=2)
            rc[k, beta == 0] = assemble_and_solve(p).rcond
    assert rc[2.404825557695773, True] < 0.2 * rc[2.0, True]
    assert rc[2.404825557695773, False] > 0.5 * rc[2.0, False]


def test_lu_solve_singular():
    with pytest.raises(SolverError) as e:
        lu_solve(np.zeros((3, 3)), np.ones(3))
    assert e.value.rcond == 0.0
    with pytest.raises(SolverError):
        lu_solve(np.array([[1.0, 1.0], [1.0, 1.0 + 1e-18]]), np.ones(2))
    x, rc = lu_solve(np.eye(2) * 2, np.ones(2))
    np.testing.assert_allclose(x, 0.5)
    assert rc == pytest.approx(1.0)


def test_solve_hybrid_without_coupling_rows():
    A = np.eye(2) * 2
    f = np.array([2.0, 4.0])
    g = np.array([1.0, 1.0, 1.0])
    C = np.ones((3, 2))
    u, xi, _ = solve_hybrid(A, f, g, [], None, lambda sl: C[sl])
    np.testing.assert_allclose(u, [1, 2])
    np.testing.assert_allclose(xi, 2 * (g - 3))


@pytest.mark.parametrize("kwargs,msg", [
    (dict(source=(0.0, 0.0)), "above"),
    (dict(source=(0.0, 2.0), scatterers=[discretize_circle([0, 2], 0.5, 16)]), "inside"),
    (dict(scatterers=[discretize_circle([0, 0.2], 0.5, 16)]), "y > 0"),
    (dict(beta=np.inf), "finite"),
])
def test_problem_validation(kwargs, msg):
    args = dict(source=(1.0, 3.0), scatterers=(), beta=None)
    args.update(kwargs)
    with pytest.raises(ValueError, match=msg):
        _problem(args["scatterers"], args["source"], args["beta"], ppw=4)


def test_field_point_validation(circle_problem):
    prob, sol = circle_problem
    with pytest.raises(ValueError):
        eval_total_field(prob, sol, [[0.0, -1.0]])
    with pytest.raises(ValueError):
        eval_total_field(prob, sol, [[0.0, 2.0]])
    assert eval_total_field(prob, sol, np.zeros((0, 2))).shape == (0,)
