"""The two-body BCS kernel K_T, its reciprocal relative-coordinate form B_T,
and the Fermi-shell mass m_mu, all evaluated in log space so that T can be
driven to the 1e-16 mu scale without overflow or cancellation.

Momentum arguments enter as a = p^2 - mu, b = q^2 - mu; the kernel is
K(a, b) = (a + b) / (tanh(a/2T) + tanh(b/2T)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quad import QuadSpec, integrate_finite

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class KernelParams:
    """Temperature and chemical potential, both positive."""

    T: float
    mu: float

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError("T must be positive and finite")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError("mu must be positive and finite")


def _kt_exponent(x: float, y: float) -> float:
    """log(K(a,b)/2T) for x = a/2T, y = b/2T, grouped so the O(|x|) linear
    parts of log cosh and log sinh cancel exactly instead of in floating point.
    """
    t1 = math.log1p(math.exp(-2.0 * abs(x))) - _LN2
    t2 = math.log1p(math.exp(-2.0 * abs(y))) - _LN2
    z = abs(x + y)
    if z < 1e-4:
        t3 = z * z / 6.0 - z ** 4 / 180.0 - z  # log(sinh z / z) - |z|
    else:
        t3 = math.log1p(-math.exp(-2.0 * z)) - _LN2 - math.log(z)
    # |x| + |y| - |x + y|: zero for equal signs, else twice the smaller magnitude
    s = 0.0 if (x >= 0.0) == (y >= 0.0) else 2.0 * min(abs(x), abs(y))
    return t1 + t2 - t3 + s


def kt(a: float, b: float, params: KernelParams) -> float:
    """K(a, b) in shifted variables.  kt(0, 0, params) is exactly 2 T.

    Returns inf when the near-cancelling tanh sum drives the kernel past
    floating-point range; the kernel really is that large there.
    """
    inv = 0.5 / params.T
    try:
        return 2.0 * params.T * math.exp(_kt_exponent(a * inv, b * inv))
    except OverflowError:
        return math.inf


def bt(p_sq: float, q_sq: float, pq_dot: float, params: KernelParams) -> float:
    """B_T(p, q) = 1 / K(|p+q|^2 - mu, |p-q|^2 - mu) for vectors p, q.

    Arguments are |p|^2, |q|^2 and the inner product p.q; the Cauchy-Schwarz
    constraint on pq_dot is enforced.  Underflows to 0 for huge momenta.
    """
    if p_sq < 0 or q_sq < 0:
        raise ValueError("squared momenta must be nonnegative")
    if pq_dot * pq_dot > p_sq * q_sq * (1.0 + 1e-12) + 1e-300:
        raise ValueError("pq_dot violates |p.q| <= |p||q|")
    a = p_sq + q_sq + 2.0 * pq_dot - params.mu
    b = p_sq + q_sq - 2.0 * pq_dot - params.mu
    inv = 0.5 / params.T
    return math.exp(-_kt_exponent(a * inv, b * inv)) / (2.0 * params.T)


def bt_radial_shifted(a, params: KernelParams):
    """B_T(p, 0) = tanh(a/2T)/a on the momentum axis, elementwise in a = p^2 - mu.

    The a -> 0 limit 1/(2T) is taken by series, so Fermi-surface nodes are safe.
    """
    a = np.asarray(a, dtype=float)
    z = a * (0.5 / params.T)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    with np.errstate(over="ignore"):
        direct = np.tanh(zs) / zs
    z2 = z * z
    series = 1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 15.0
    out = np.where(small, series, direct) * (0.5 / params.T)
    return out if out.ndim else float(out)


def _x_over_tanh(x):
    """x / tanh(x), elementwise, with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-5
    xs = np.where(small, 1.0, x)
    direct = xs / np.tanh(xs)
    x2 = x * x
    series = 1.0 + x2 / 3.0 - x2 * x2 / 45.0
    out = np.where(small, series, direct)
    return out if out.ndim else float(out)


def tanh_inequality_gap(x, y):
    """lhs - rhs of (x+y)/(tanh x + tanh y) >= (x/tanh x + y/tanh y)/2.

    Elementwise over real x, y; the lhs is evaluated through the same
    log-space route as kt, so the y = -x line is a removable limit.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t12 = np.log1p(np.exp(-2.0 * np.abs(x))) + np.log1p(np.exp(-2.0 * np.abs(y))) - 2.0 * _LN2
    u = np.abs(x + y)
    smallu = u < 1e-4
    us = np.where(smallu, 1.0, u)
    t3 = np.where(smallu, u * u / 6.0 - u ** 4 / 180.0 - u,
                  np.log1p(-np.exp(-2.0 * us)) - _LN2 - np.log(us))
    s = np.where((x >= 0.0) == (y >= 0.0), 0.0, 2.0 * np.minimum(np.abs(x), np.abs(y)))
    with np.errstate(over="ignore"):
        lhs = np.exp(t12 - t3 + s)
    rhs = 0.5 * (_x_over_tanh(x) + _x_over_tanh(y))
    out = lhs - rhs
    return out if out.ndim else float(out)


def m_mu(params: KernelParams, d: int) -> float:
    """Fermi-shell mass: integral of B_T(t, 0) t^(d-1) over 0 < t < sqrt(2 mu).

    Evaluated directly in t, where the integrand is smooth at both endpoints
    for every d (the shifted variable a = t^2 - mu would put an integrable
    1/sqrt singularity at a = -mu when d = 1).  Breakpoints at the thermal
    shells sqrt(mu +/- T 10^k) keep the adaptive panels honest when T << mu.
    """
    if d not in (1, 2, 3):
        raise ValueError(f"d must be 1, 2 or 3, got {d}")
    T, mu = params.T, params.mu
    top = math.sqrt(2.0 * mu)

    def f(t):
        return float(bt_radial_shifted(t * t - mu, params)) * t ** (d - 1)

    pts = [math.sqrt(mu)]
    scale = T
    while scale < mu:
        pts += [math.sqrt(mu + scale), math.sqrt(mu - scale)]
        scale *= 10.0
    spec = QuadSpec(abs_tol=1e-12, rel_tol=1e-10, max_evals=200_000,
                    singular_points=tuple(sorted(p for p in pts if 0.0 < p < top)))
    return integrate_finite(f, 0.0, top, spec).value


def fit_kt_sandwich(params: KernelParams, n: int = 40):
    """Fit constants with C1 (T + p^2 + q^2) <= K <= C2 (p^2 + q^2 + 1) over
    physical momenta and T in [T0, 10 T0].

    Returns (C1, C2) for inspection rather than assertion: C2 blows up like
    the near-cancellation peak 2T cosh^2(mu/2T) as T0 is lowered.
    """
    T0, mu = params.T, params.mu
    p2_grid = np.concatenate([[0.0], np.geomspace(1e-3 * mu, 1e2 * mu, n)])
    c1, c2 = math.inf, 0.0
    for T in np.geomspace(T0, 10.0 * T0, 5):
        par = KernelParams(T=float(T), mu=mu)
        for p2 in p2_grid:
            for q2 in p2_grid:
                k = kt(p2 - mu, q2 - mu, par)
                if math.isfinite(k):
                    c1 = min(c1, k / (T + p2 + q2))
                    c2 = max(c2, k / (p2 + q2 + 1.0))
    return float(c1), float(c2)
