import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybridbem.specfun import contour_node, erf, hankel1, sommerfeld_sqrt

mp.mp.dps = 50


def _h_ref(n, x):
    return complex(mp.besselj(n, x) + 1j * mp.bessely(n, x))


@pytest.mark.parametrize("n", [0, 1])
def test_hankel_matches_high_precision_oracle(n):
    xs = np.geomspace(1e-3, 100.0, 60)
    got = hankel1(n, xs)
    ref = np.array([_h_ref(n, x) for x in xs])
    assert np.max(np.abs(got - ref) / np.abs(ref)) <= 1e-10


def test_hankel_reference_values():
    assert abs(hankel1(0, 1.0) - (0.7651976866 + 0.0882569642j)) < 1e-9
    assert abs(hankel1(1, 1.0) - (0.4400505857 - 0.7812128213j)) < 1e-9


def test_hankel_small_argument_limit():
    h = hankel1(0, 1e-8)
    assert abs(h.real - 1.0) < 1e-12
    assert h.imag < -10.0
    assert hankel1(0, 1e-12).imag < h.imag


def test_wronskian():
    x = np.linspace(0.01, 50.0, 500)
    h0, h1 = hankel1(0, x), hankel1(1, x)
    J0, Y0, J1, Y1 = h0.real, h0.imag, h1.real, h1.imag
    w = J0 * (-Y1) - (-J1) * Y0
    assert np.max(np.abs(w - 2.0 / (np.pi * x)) / (2.0 / (np.pi * x))) <= 1e-9


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf, np.nan])
def test_hankel_domain_errors(bad):
    with pytest.raises(ValueError):
        hankel1(0, bad)


def test_hankel_rejects_other_orders():
    with pytest.raises(ValueError):
        hankel1(2, 1.0)


def test_erf_values():
    assert erf(0.0) == 0.0
    assert abs(erf(1.0) - 0.8427007929497149) < 1e-12
    assert abs(erf(10.0) - 1.0) <= 1e-15
    xs = np.linspace(-6, 6, 101)
    ref = np.array([float(mp.erf(x)) for x in xs])
    assert np.max(np.abs(erf(xs) - ref)) <= 1e-12


@given(st.floats(-30, 30))
def test_erf_is_odd(x):
    assert erf(-x) == -erf(x)


def test_sommerfeld_sqrt_branches():
    assert abs(sommerfeld_sqrt(2.0, 1.0) - np.sqrt(3.0)) < 1e-15
    assert sommerfeld_sqrt(0.0, 1.0) == -1j
    assert sommerfeld_sqrt(1.0, 1.0) == 0
    lam = np.linspace(-5, 5, 1001)
    s = sommerfeld_sqrt(lam, 2.0)
    inside = np.abs(lam) < 2
    assert np.all(s[inside].imag <= 0) and np.all(s[inside].real == 0)
    assert np.all(s[~inside].real >= 0)


@settings(max_examples=200)
@given(st.floats(-50, 50), st.floats(-3, 3), st.floats(0.1, 20))
def test_sommerfeld_sqrt_squares_back(re, im, k):
    lam = complex(re, im)
    s = sommerfeld_sqrt(lam, k)
    assert abs(s * s - (lam * lam - k * k)) <= 1e-12 * max(1.0, abs(lam) ** 2 + k * k)


def test_sommerfeld_sqrt_decays_on_contour():
    t = np.linspace(-40, 40, 2001)
    lam, _ = contour_node(t, 2.0)
    s = sommerfeld_sqrt(lam, 5.0)
    assert np.all(s.real >= 0)
    assert np.all(np.abs(np.exp(-s * 1.0)) <= 1.0 + 1e-12)


def test_contour_node_values():
    lam, dlam = contour_node(0.0, 2.0)
    assert lam == 0 and dlam == 1 - 0.5j
    lam, _ = contour_node(50.0, 4.0)
    assert abs(lam - (50 - 0.25j)) < 1e-12
    t = np.linspace(0.1, 5, 20)
    lp, _ = contour_node(t, 2.0)
    lm, _ = contour_node(-t, 2.0)
    np.testing.assert_allclose(lm.real, -t)
    np.testing.assert_allclose(lm.imag, np.tanh(t) / 2.0)
    np.testing.assert_allclose(lm, -lp)


def test_contour_avoids_branch_points():
    for k, a in [(1.0, 2.0), (5.0, 8.0), (10.0, 2.0)]:
        t = np.linspace(k - 0.5, k + 0.5, 2001)
        lam, _ = contour_node(t, a)
        assert np.min(np.abs(lam - k)) >= np.tanh(k) / a * (1 - 0.05)


def test_contour_jacobian_matches_derivative():
    t = np.linspace(-3, 3, 31)
    h = 1e-6
    lp, _ = contour_node(t + h, 3.0)
    lm, _ = contour_node(t - h, 3.0)
    _, d = contour_node(t, 3.0)
    np.testing.assert_allclose((lp - lm) / (2 * h), d, atol=1e-8)


def test_contour_rejects_nonpositive_a():
    with pytest.raises(ValueError):
        contour_node(0.0, 0.0)
