import numpy as np
import pytest
from scipy import integrate, special

from hybridbem.geometry import discretize_circle, discretize_segment
from hybridbem.potentials import (
    assemble_layer,
    eval_layer,
    kernel_d2G,
    kernel_dGdnx,
    kernel_dGdny,
    kernel_G,
    layer_matrix,
)
from hybridbem.specfun import hankel1


def _G_exact(r, k):
    return 0.25j * (special.j0(k * r) + 1j * special.y0(k * r))


def test_kernel_G_value_and_symmetry():
    k = 2.0
    x, y = np.array([0.3, 0.1]), np.array([0.3 + 0.5 / np.sqrt(2), 0.1 + 0.5 / np.sqrt(2)])
    assert abs(kernel_G(x, y, k) - (-0.0220642411 + 0.1912994217j)) < 1e-9
    assert kernel_G(x, y, k) == kernel_G(y, x, k)
    rot = np.array([[0.6, -0.8], [0.8, 0.6]])
    assert abs(kernel_G(rot @ x, rot @ y, k) - kernel_G(x, y, k)) < 1e-14


def test_kernel_coincident_points_raise():
    with pytest.raises(ValueError):
        kernel_G([0, 0], [0, 0], 1.0)
    with pytest.raises(ValueError):
        kernel_dGdny([0, 0], [0, 0], [0, 1], 1.0)


def test_kernel_derivatives_vanish_for_perpendicular_normals():
    x, y = np.array([2.0, 0.0]), np.array([0.0, 0.0])
    n = np.array([0.0, 1.0])
    assert kernel_dGdny(x, y, n, 3.0) == 0
    assert kernel_dGdnx(x, y, n, 3.0) == 0


def test_kernel_derivatives_match_finite_differences():
    k, h = 2.5, 1e-5
    x, y = np.array([0.4, 1.3]), np.array([-0.2, 0.5])
    nx = np.array([0.6, 0.8])
    ny = np.array([1.0, 0.0])
    fd_y = (kernel_G(x, y + h * ny, k) - kernel_G(x, y - h * ny, k)) / (2 * h)
    fd_x = (kernel_G(x + h * nx, y, k) - kernel_G(x - h * nx, y, k)) / (2 * h)
    assert abs(kernel_dGdny(x, y, ny, k) - fd_y) <= 1e-6 * abs(fd_y)
    assert abs(kernel_dGdnx(x, y, nx, k) - fd_x) <= 1e-6 * abs(fd_x)
    g = lambda a, b: kernel_G(x + a * nx, y + b * ny, k)  # noqa: E731
    fd2 = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4 * h * h)
    assert abs(kernel_d2G(x, y, nx, ny, k) - fd2) <= 1e-5 * abs(fd2)


def test_kernel_d2G_parallel_normals():
    k, d = 1.7, 0.8
    n = np.array([0.0, 1.0])
    got = kernel_d2G([d, 0.0], [0.0, 0.0], n, n, k)
    assert abs(got - 0.25j * k * hankel1(1, k * d) / d) < 1e-14


def _self_S_oracle(h, k):
    f = lambda s: _G_exact(abs(s), k)  # noqa: E731
    re = integrate.quad(lambda s: f(s).real, -h / 2, h / 2, points=[0], limit=200, epsabs=1e-14)[0]
    im = integrate.quad(lambda s: f(s).imag, -h / 2, h / 2, points=[0], limit=200, epsabs=1e-14)[0]
    return re + 1j * im


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("h,k", [(0.05, 1.0), (0.3, 2.0), (1.0, 5.0)])
def test_self_single_layer_against_adaptive_quadrature(h, k):
    m = discretize_segment([0, 0], [h, 0], 1)
    got = assemble_layer("S", m.midpoints, None, m, k)[0, 0]
    ref = _self_S_oracle(h, k)
    assert abs(got - ref) <= 1e-6 * abs(ref)


def test_self_single_layer_small_kh_formula():
    h, k = 1e-3, 1.0
    m = discretize_segment([0, 0], [h, 0], 1)
    got = assemble_layer("S", m.midpoints, None, m, k)[0, 0]
    approx = 0.25j * h * (1 + 2j / np.pi * (np.log(k * h / 4) + np.euler_gamma - 1))
    assert abs(got - approx) <= 1e-6 * abs(approx)


def test_self_double_layers_vanish_on_flat_panels():
    m = discretize_segment([0, 0], [1, 0], 10)
    for kind in ("D", "Dt"):
        A = assemble_layer(kind, m.midpoints, m.normals, m, 2.0)
        assert np.all(A == 0)


def test_self_hypersingular_against_finite_difference():
    # finite part on the own panel = limit of the normal derivative of D
    k, h, d = 3.0, 0.2, 1e-4
    m = discretize_segment([0, 0], [h, 0], 1)
    x = m.midpoints
    n = m.normals
    got = assemble_layer("N", x, n, m, k)[0, 0]
    dp = eval_layer("D", m, [1.0], x + d * n, k)
    dm = eval_layer("D", m, [1.0], x + 2 * d * n, k)
    dpp = eval_layer("D", m, [1.0], x + 3 * d * n, k)
    # one-sided second-order difference at x + 2d
    fd = (dpp - dp) / (2 * d)
    assert abs(got - fd[0]) <= 1e-3 * abs(got)
    assert np.isfinite(dm).all()


def test_laplace_limit_hypersingular_annihilates_constants():
    m = discretize_circle([0, 0], 1.0, 200)
    k = 1e-6
    N = assemble_layer("N", m.midpoints, m.normals, m, k)
    row = N.sum(axis=1)
    assert np.max(np.abs(row)) <= 1e-3 * np.abs(N).max() * len(m) ** 0


def normal_derivative_fd(kind, mesh, dens, k, delta):
    """Fluid-side normal derivative of a layer field at the collocation nodes.

    Centered differences about x + 2 delta n and x + 4 delta n, extrapolated
    linearly to the boundary.
    """
    x, n = mesh.midpoints, mesh.normals
    f = lambda t: eval_layer(kind, mesh, dens, x + t * delta * n, k)  # noqa: E731
    g2 = (f(3) - f(1)) / (2 * delta)
    g4 = (f(5) - f(3)) / (2 * delta)
    return 2 * g2 - g4


def test_hypersingular_against_fd_of_double_layer_field():
    k = 2.0
    m = discretize_circle([0, 0], 1.0, 200)
    th = np.arctan2(m.midpoints[:, 1], m.midpoints[:, 0])
    delta = 1e-4 * 2 * np.pi / k
    N = assemble_layer("N", m.midpoints, m.normals, m, k)
    for dens in (np.cos(th), np.sin(2 * th) + 0.5 * np.cos(3 * th), np.exp(np.cos(th))):
        fd = normal_derivative_fd("D", m, dens, k, delta)
        act = N @ dens
        assert np.linalg.norm(act - fd) <= 1e-3 * np.linalg.norm(fd)


def test_eval_layer_zero_density_and_far_field():
    m = discretize_segment([0, 0], [0.1, 0], 1)
    assert np.all(eval_layer("S", m, [0.0], [[3, 4]], 1.0) == 0)
    far = np.array([[3.0, 4.0]])
    got = eval_layer("S", m, [2.0], far, 1.0)[0]
    approx = 0.1 * kernel_G(far[0], m.midpoints[0], 1.0) * 2.0
    assert abs(got - approx) <= (0.1 / 5) ** 2 * abs(approx)


def test_eval_layer_circle_vs_brute_force():
    k, r = 2.0, 1.0
    m = discretize_circle([0, 0], r, 400)
    x = np.array([[0.0, 2.0 * r + r]])
    got = eval_layer("S", m, np.ones(len(m)), x, k)[0]
    t = np.linspace(0, 2 * np.pi, 10_000, endpoint=False)
    pts = np.column_stack([np.cos(t), np.sin(t)]) * r
    ref = np.sum(_G_exact(np.hypot(*(x - pts).T), k)) * 2 * np.pi * r / len(t)
    # polygon vs circle geometry error is O(n^-2)
    assert abs(got - ref) <= 1e-4 * abs(ref)


def test_eval_layer_on_panel_raises():
    m = discretize_segment([0, 0], [1, 0], 4)
    with pytest.raises(ValueError):
        eval_layer("S", m, np.ones(4), [[0.3, 0.0]], 1.0)


def test_foreign_panel_collocation_raises():
    m = discretize_segment([0, 0], [1, 0], 4)
    with pytest.raises(ValueError):
        layer_matrix("S", [[0.3, 0.0]], None, m, 1.0)


def test_near_singular_entries_converge():
    k = 2.0
    m = discretize_segment([0, 0], [0.2, 0], 1)
    x = np.array([[0.07, 1e-3]])
    got = eval_layer("S", m, [1.0], x, k)[0]
    f = lambda s: _G_exact(np.hypot(x[0, 0] - s, x[0, 1]), k)  # noqa: E731
    ref = (integrate.quad(lambda s: f(s).real, 0, 0.2, points=[0.07], limit=200, epsabs=1e-14)[0]
           + 1j * integrate.quad(lambda s: f(s).imag, 0, 0.2, points=[0.07], limit=200, epsabs=1e-14)[0])
    assert abs(got - ref) <= 1e-8 * abs(ref)


def test_single_layer_symmetry_and_determinism():
    m = discretize_circle([0, 2], 0.5, 60)
    S1 = assemble_layer("S", m.midpoints, None, m, 3.0)
    S2 = assemble_layer("S", m.midpoints, None, m, 3.0)
    assert np.array_equal(S1, S2)
    assert np.max(np.abs(S1 - S1.T)) <= 1e-10 * np.abs(S1).max()
