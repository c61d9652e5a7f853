"""Bessel J0, sine integral, the entire cosine integral Cin, and the radial
profiles j_d of the Fermi-sphere surface measure in d = 1, 2, 3."""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


def bessel_j0(x):
    """J0(x), elementwise."""
    out = _sp.j0(x)
    return out if np.ndim(out) else float(out)


def sine_integral(x):
    """Si(x) = integral of sin(t)/t over [0, x], elementwise."""
    si, _ = _sp.sici(x)
    return si if np.ndim(si) else float(si)


def cosine_integral_cin(x):
    """Cin(x) = integral of (1 - cos t)/t over [0, x] for x >= 0.

    Uses the power series below x = 0.5 (the gamma + log(x) - Ci(x) form
    cancels catastrophically there) and the Ci relation above.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("Cin is evaluated on x >= 0 only")
    small = x < 0.5
    out = np.empty_like(x)

    xs = np.where(small, x, 0.0)
    acc = np.zeros_like(xs)
    x2 = xs * xs
    term = x2 / 4.0  # k = 1 term: x^2 / (2 * 2!)
    k = 1
    while np.any(np.abs(term) > 1e-18) and k < 12:
        acc += term
        k += 1
        term *= -x2 * (2 * k - 2) / ((2 * k) * (2 * k) * (2 * k - 1))
    out[small] = acc[small]

    big = ~small
    if np.any(big):
        _, ci = _sp.sici(x[big])
        out[big] = np.euler_gamma + np.log(x[big]) - ci
    return out if out.ndim else float(out)


def j_d(r, mu: float, d: int):
    """Radial profile of the plane-wave average over the Fermi sphere.

    j_1 = sqrt(2/pi) cos(sqrt(mu) r), j_2 = J0(sqrt(mu) r),
    j_3 = sqrt(2/pi) sin(sqrt(mu) r)/(sqrt(mu) r), elementwise in r.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    z = np.sqrt(mu) * np.asarray(r, dtype=float)
    if d == 1:
        out = _SQRT_2_OVER_PI * np.cos(z)
    elif d == 2:
        out = _sp.j0(z)
    elif d == 3:
        out = _SQRT_2_OVER_PI * _sinc(z)
    else:
        raise ValueError(f"d must be 1, 2 or 3, got {d}")
    return out if out.ndim else float(out)


def _sinc(z):
    """sin(z)/z with a Taylor branch so z = 0 is exact."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 0.0, z)
    z2 = z * z
    series = 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0 * (1.0 - z2 / 42.0))
    with np.errstate(invalid="ignore"):
        direct = np.where(small, 1.0, np.sin(zs) / np.where(small, 1.0, zs))
    return np.where(small, series, direct)
