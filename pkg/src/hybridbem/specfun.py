"""Special functions used by the integral kernels.

Hankel functions of the first kind (orders 0 and 1), the error function,
the branch of sqrt(lambda^2 - k^2) used in Sommerfeld integrals, and the
deformed Fourier contour lambda(t) = t - i tanh(t) / a.
"""

import numpy as np
from scipy import special

__all__ = ["hankel1", "erf", "sommerfeld_sqrt", "contour_node"]


def hankel1(n, x):
    """Hankel function of the first kind H_n^(1)(x) = J_n(x) + i Y_n(x).

    Parameters
    ----------
    n : {0, 1}
        Order.
    x : float or ndarray
        Positive, finite real argument(s).

    Returns
    -------
    complex or ndarray of complex
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("hankel1 requires finite x > 0")
    if n == 0:
        out = special.j0(x) + 1j * special.y0(x)
    elif n == 1:
        out = special.j1(x) + 1j * special.y1(x)
    else:
        raise ValueError(f"hankel1 supports orders 0 and 1, got {n}")
    return out if out.ndim else complex(out)


def erf(x):
    """Error function (odd, saturating at +-1)."""
    out = special.erf(np.asarray(x, dtype=float))
    return out if out.ndim else float(out)


def sommerfeld_sqrt(lam, k):
    """Branch of sqrt(lambda^2 - k^2) used in the Sommerfeld representation.

    On the real axis this is +sqrt(lambda^2 - k^2) for |lambda| > k and
    -i sqrt(k^2 - lambda^2) otherwise.  Off the axis it is the continuation
    -i * sqrt(k^2 - lambda^2) (principal root), which has a non-negative
    real part along the deformed contour so that exp(-sqrt(.) y) decays.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    lam0 = np.asarray(lam, dtype=complex)
    lam = np.atleast_1d(lam0)
    out = -1j * np.sqrt(k * k - lam * lam)
    on_axis = lam.imag == 0.0
    if np.any(on_axis):
        lr = lam.real[on_axis]
        d = lr * lr - k * k
        out[on_axis] = np.where(d > 0.0, np.sqrt(np.abs(d)) + 0j, -1j * np.sqrt(np.abs(d)))
    return out.reshape(lam0.shape) if lam0.ndim else complex(out[0])


def contour_node(t, a):
    """Point on the deformed contour and its Jacobian.

    Returns ``(lam, dlam_dt)`` with lam = t - i tanh(t)/a and
    dlam/dt = 1 - i sech(t)^2 / a.  The contour passes below +k and above -k.
    """
    if a <= 0:
        raise ValueError("contour parameter a must be positive")
    t = np.asarray(t, dtype=float)
    lam = t - 1j * np.tanh(t) / a
    dlam = 1.0 - 1j / (a * np.cosh(t) ** 2)
    if lam.ndim == 0:
        return complex(lam), complex(dlam)
    return lam, dlam
