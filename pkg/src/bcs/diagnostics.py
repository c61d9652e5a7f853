"""Low-temperature growth diagnostics for the boundary pairing forms.

dt_form_d1 and dt_form_d2 evaluate the quadratic form that measures how
strongly a boundary enhances pairing at temperature T in one and two
dimensions, where it diverges like 1/T and ln(mu/T)^3; fit_growth
quantifies how well a sampled sweep follows the declared growth law.
rhs_weak_coupling_d3 computes the zero-coupling limit of the
three-dimensional boundary energy as three separate position-space terms,
an independent route to the number boundary3d.criterion produces from the
closed-form profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .boundary3d import DIRICHLET, normalize_bc
from .kernels import KernelParams, bt_radial_shifted
from .potentials import RadialPotential, StepPotential, fourier_hat
from .quad import (Decay, QuadSpec, QuadratureError, integrate_finite,
                   integrate_oscillatory_tail)
from .special import bessel_j0, j_d


def _potential_spec(V: RadialPotential, abs_tol=1e-13, rel_tol=1e-10) -> QuadSpec:
    sing = (V.R,) if isinstance(V, StepPotential) else ()
    return QuadSpec(abs_tol=abs_tol, rel_tol=rel_tol, singular_points=sing)


def dt_form_d1(V: RadialPotential, T: float, mu: float) -> float:
    """Boundary pairing form for a d=1 potential; grows like 1/T.

    Evaluates Vhat(0) times the line integral of B_T(p,0)^2 |(V j1)^(p)|^2,
    with the transform of V j1 computed per node as a cosine transform.
    Panel breaks at p = sqrt(mu) and at the thermal shells |p^2 - mu| =
    T 10^k keep the Fermi peak resolved; the far tail is extended by
    octaves until its analytic bound is negligible.
    """
    if V.d != 1:
        raise ValueError("dt_form_d1 needs a d=1 potential")
    params = KernelParams(T=float(T), mu=float(mu))
    mu = params.mu
    root_mu = math.sqrt(mu)
    rc = V.cutoff_radius()
    inner = _potential_spec(V)

    def w(p):
        res = integrate_finite(
            lambda r: V.value(r) * math.cos(root_mu * r) * math.cos(p * r),
            0.0, rc, inner)
        return (2.0 / math.pi) * res.value

    def f(p):
        return (bt_radial_shifted(p * p - mu, params) * w(p)) ** 2

    pts = [root_mu]
    s = params.T
    while s < mu:
        pts.append(math.sqrt(mu + s))
        pts.append(math.sqrt(mu - s))
        s *= 10.0
    p0 = 2.0 * root_mu
    spec0 = QuadSpec(abs_tol=1e-12, rel_tol=1e-9, max_evals=200_000,
                     singular_points=tuple(sorted(p for p in pts if p < p0)))
    total = integrate_finite(f, 0.0, p0, spec0).value

    w_bound = (2.0 / math.pi) * integrate_finite(
        lambda r: abs(V.value(r)), 0.0, rc, inner).value
    p = p0
    # Beyond sqrt(2 mu) the kernel factor is at most 2/p^2, so the remaining
    # tail is bounded by 4 w_bound^2 / (3 p^3); extend by octaves until that
    # clears the tolerance of the accumulated value.
    while 4.0 * w_bound ** 2 / (3.0 * p ** 3) > max(1e-12, 1e-9 * abs(total)):
        spec_t = QuadSpec(abs_tol=max(1e-12, 1e-10 * abs(total)), rel_tol=1e-6,
                          max_evals=200_000)
        total += integrate_finite(f, p, 2.0 * p, spec_t).value
        p *= 2.0
        if p > 1e9 * max(root_mu, 1.0):
            raise QuadratureError("transform tail did not become negligible")
    return 2.0 * fourier_hat(V, 0.0) * total


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _panel_nodes(edges):
    """Gauss-Legendre 16 nodes and weights for a panel decomposition."""
    e = np.asarray(edges, dtype=float)
    mid = 0.5 * (e[1:] + e[:-1])
    half = 0.5 * (e[1:] - e[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES).ravel()
    weights = (half[:, None] * _GL_WEIGHTS).ravel()
    return nodes, weights


def _refined_edges(length, base, features):
    """Panel edges on [0, length]: spacing at most ``base``, plus a geometric
    ladder closing down to each feature's own width so the panels track
    sharp thermal layers without a global fine grid."""
    pts = {0.0, float(length)}
    for center, width in features:
        width = max(float(width), 1e-14 * length)
        ladder = [float(center)]
        off = width
        while off < 2.0 * base:
            ladder += [center - off, center + off]
            off *= 2.0
        pts.update(x for x in ladder if 0.0 < x < length)
    edges = sorted(pts)
    out = [edges[0]]
    for e in edges[1:]:
        gap = e - out[-1]
        if gap <= 1e-15 * length:
            continue
        lo = out[-1]
        if gap > base:
            n = int(math.ceil(gap / base - 1e-12))
            out.extend(lo + gap * k / n for k in range(1, n))
        out.append(e)
    return out


def _vj2_hat(V: RadialPotential, mu: float, s: float) -> float:
    """Radial transform of V j2 at momentum s (2-D convention)."""
    root_mu = math.sqrt(mu)
    spec = _potential_spec(V)
    return integrate_finite(
        lambda r: V.value(r) * bessel_j0(root_mu * r) * bessel_j0(s * r) * r,
        0.0, V.cutoff_radius(), spec).value


@lru_cache(maxsize=4)
def _d2_tables(V: RadialPotential, mu: float):
    """Momentum cutoff, transform splines and the coarse kernel grid shared
    by every dt_form_d2 temperature for one (V, mu) pair."""
    root_mu = math.sqrt(mu)
    rc = V.cutoff_radius()
    rs = V.range_scale

    # Push the cutoff until the transform envelope, damped by the two
    # off-shell kernel factors, is negligible against the on-shell scale.
    vref = max(abs(fourier_hat(V, 0.5 * j / rs)) for j in range(11))
    P = root_mu + 5.0 / rs
    while max(abs(fourier_hat(V, P + 0.5 * j / rs)) for j in range(11)) \
            * (mu / (P * P - mu)) ** 2 > 1e-8 * vref:
        P += 5.0 / rs
        if P > root_mu + 400.0 / rs:
            raise QuadratureError(
                "transform tail not negligible within the momentum cutoff cap")

    h = 0.35 / rc
    smax = math.sqrt(2.0) * P + 2.0 * h
    s_grid = np.linspace(0.0, smax, int(math.ceil(smax / h)) + 1)
    w_spline = CubicSpline(s_grid, [_vj2_hat(V, mu, float(s)) for s in s_grid])
    kmax = 2.0 * P + 2.0 * h
    k_grid = np.linspace(0.0, kmax, int(math.ceil(kmax / h)) + 1)
    vhat_spline = CubicSpline(k_grid, [fourier_hat(V, float(k)) for k in k_grid])
    coarse = np.linspace(0.0, P, int(math.ceil(P / h)) + 1)
    return P, w_spline, vhat_spline, coarse


def dt_form_d2(V: RadialPotential, T: float, mu: float) -> float:
    """Boundary pairing form for a d=2 potential; grows like ln(mu/T)^3.

    Iterated integral over (p1, p2, q2).  For each p1 node the transverse
    double integral is evaluated on Gauss panels refined geometrically
    toward the Fermi circle crossing, with the smooth convolution factor
    interpolated from a coarse grid; the radial transforms of V and V j2
    come from splines shared across temperatures.
    """
    if V.d != 2:
        raise ValueError("dt_form_d2 needs a d=2 potential")
    params = KernelParams(T=float(T), mu=float(mu))
    T, mu = params.T, params.mu
    root_mu = math.sqrt(mu)
    P, w_spline, vhat_spline, coarse = _d2_tables(V, mu)
    base = min(2.0 / V.cutoff_radius(), 0.25 * root_mu)
    sqrt_T = math.sqrt(T)

    p1_edges = _refined_edges(P, base, [(root_mu, 0.25 * T / root_mu)])
    p1_nodes, p1_weights = _panel_nodes(p1_edges)

    total = 0.0
    for p1, w1 in zip(p1_nodes, p1_weights):
        a1 = p1 * p1 - mu
        qstar = math.sqrt(-a1) if a1 < 0.0 else 0.0
        q_edges = _refined_edges(P, base,
                                 [(qstar, 0.5 * T / max(qstar, sqrt_T))])
        q, wq = _panel_nodes(q_edges)
        s_sq = p1 * p1 + q * q
        u = w_spline(np.sqrt(s_sq)) * bt_radial_shifted(s_sq - mu, params) * wq
        kern = vhat_spline(np.abs(coarse[:, None] - q)) \
            + vhat_spline(coarse[:, None] + q)
        i_fine = CubicSpline(coarse, kern @ u)(q)
        total += float(w1) * float(np.dot(u, i_fine))
    return 4.0 * total


def d2_integrand(V: RadialPotential, T: float, mu: float,
                 p1: float, p2: float, q2: float) -> float:
    """Pointwise integrand of dt_form_d2's transverse double integral, the
    even-reflected kernel included.  Symmetric under p2 <-> q2; exposed so
    that symmetry and brute-force cross-checks need no spline machinery."""
    if V.d != 2:
        raise ValueError("d2_integrand needs a d=2 potential")
    params = KernelParams(T=float(T), mu=float(mu))
    wp = _vj2_hat(V, mu, math.hypot(p1, p2))
    wq = _vj2_hat(V, mu, math.hypot(p1, q2))
    bp = bt_radial_shifted(p1 * p1 + p2 * p2 - mu, params)
    bq = bt_radial_shifted(p1 * p1 + q2 * q2 - mu, params)
    kern = fourier_hat(V, abs(p2 - q2)) + fourier_hat(V, p2 + q2)
    return wp * bp * kern * bq * wq


@lru_cache(maxsize=8)
def _fullline_spline(y_max: float):
    """Spline of the full-line integral of the squared spherical wave at
    transverse offset y, both in units of the Fermi wavelength: at y = 0 the
    value is exactly 2 and it decays like 1/y."""
    spec = QuadSpec(abs_tol=1e-11, rel_tol=1e-10, max_evals=60000)
    ys = np.linspace(0.0, y_max, max(64, int(math.ceil(y_max / 0.04)) + 1))
    vals = [2.0]
    for y in ys[1:]:
        y = float(y)

        def wgt(s, y=y):
            return 1.0 / (s * math.sqrt((s - y) * (s + y)))

        def f(s, y=y):
            return math.sin(s) ** 2 * wgt(s, y)

        s0 = y + max(y, 4.0 * math.pi)
        fin = integrate_finite(f, y, s0, spec)
        tail = integrate_oscillatory_tail(wgt, 1.0, s0, spec, kind="sin2",
                                          decay=Decay.algebraic(2))
        vals.append((4.0 / math.pi) * (fin.value + tail.value))
    return CubicSpline(ys, vals)


@dataclass(frozen=True)
class RhsBreakdown:
    """Zero-coupling boundary energy split into its position-space pieces.

    ``terms`` holds the full-line wave term, the reflected-window
    correction and the point term; ``total`` is exactly their sum.
    """

    total: float
    terms: dict = field(repr=False)

    def __post_init__(self):
        if set(self.terms) != {"full_line", "window", "point"}:
            raise ValueError("terms must be full_line, window and point")
        gap = abs(self.total - math.fsum(self.terms.values()))
        if gap > 1e-12 * max(1.0, abs(self.total)):
            raise ValueError("terms do not add up to the total")


def rhs_weak_coupling_d3(V: RadialPotential, mu: float, bc) -> RhsBreakdown:
    """Zero-coupling limit of the d=3 half-space boundary energy.

    Integrates V against the boundary density assembled from its defining
    line integrals: the full-line wave term, minus the reflected window
    restricted to |z1| < |r1|, and the point term carrying the boundary
    sign.  A route independent of the closed-form profile terms, so the
    total must reproduce boundary3d.criterion's value.
    """
    b = normalize_bc(bc)
    sgn = 1.0 if b == DIRICHLET else -1.0
    if V.d != 3:
        raise ValueError("rhs_weak_coupling_d3 needs a d=3 potential")
    if not (mu > 0.0 and math.isfinite(mu)):
        raise ValueError(f"chemical potential must be positive, got {mu}")
    root_mu = math.sqrt(mu)
    rc = V.cutoff_radius()
    outer = _potential_spec(V, abs_tol=1e-12, rel_tol=1e-10)
    mid = QuadSpec(abs_tol=1e-11, rel_tol=1e-9, max_evals=60000)

    g = _fullline_spline(root_mu * rc * (1.0 + 1e-9))

    def fullline_avg(r):
        return integrate_finite(
            lambda phi: float(g(root_mu * r * math.cos(phi))) * math.cos(phi),
            0.0, 0.5 * math.pi, mid).value

    full = integrate_finite(lambda r: V.value(r) * r * r * fullline_avg(r),
                            0.0, rc, outer)
    term_full = 4.0 * math.pi / root_mu * full.value

    n_z = max(32, min(256, int(4.0 * root_mu * rc) + 16))
    gz, gw = np.polynomial.legendre.leggauss(n_z)

    def window_avg(r):
        jr = float(j_d(r, mu, 3))

        def over_c(c):
            r1 = r * c
            rho = r * math.sqrt(max(1.0 - c * c, 0.0))
            z = 0.5 * r1 * (gz + 1.0)
            vals = (j_d(np.sqrt(z * z + rho * rho), mu, 3) - sgn * jr) ** 2
            return r1 * float(np.dot(gw, vals))

        return integrate_finite(over_c, 0.0, 1.0, mid).value

    win = integrate_finite(lambda r: V.value(r) * r * r * window_avg(r),
                           0.0, rc, outer)
    term_window = -4.0 * math.pi * win.value

    pt = integrate_finite(
        lambda r: V.value(r) * float(j_d(r, mu, 3)) ** 2 * r * r,
        0.0, rc, outer)
    term_point = -sgn * (math.pi / root_mu) * 4.0 * math.pi * pt.value

    terms = {"full_line": term_full, "window": term_window, "point": term_point}
    return RhsBreakdown(total=math.fsum(terms.values()), terms=terms)


_GROWTH_MODELS = ("inverse_T", "log_cubed")


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares constant for a declared low-temperature growth law.

    ``samples`` holds the fitted (T, value) pairs sorted by decreasing
    temperature; ``max_relative_deviation`` is the worst sample's departure
    from ``fitted_constant`` times the model basis.
    """

    samples: tuple
    model: str
    fitted_constant: float
    max_relative_deviation: float

    def __post_init__(self):
        if self.model not in _GROWTH_MODELS:
            raise ValueError(f"unknown growth model {self.model!r}")
        ts = [t for t, _ in self.samples]
        if any(nxt >= prev for prev, nxt in zip(ts, ts[1:])):
            raise ValueError("samples must be sorted by strictly decreasing T")
        if self.max_relative_deviation < 0.0:
            raise ValueError("deviation must be nonnegative")


def fit_growth(samples, model: str, mu: float | None = None) -> GrowthFit:
    """Fit value ~ C/T or C ln(mu/T)^3 through the origin, least squares.

    The log model measures temperatures against the scale ``mu``, which
    must accompany it.  Needs at least three samples with distinct
    positive temperatures.
    """
    if model not in _GROWTH_MODELS:
        raise ValueError(
            f"unknown growth model {model!r}; choose from {_GROWTH_MODELS}")
    pairs = sorted(((float(t), float(v)) for t, v in samples),
                   key=lambda tv: -tv[0])
    if len(pairs) < 3:
        raise ValueError("growth fits need at least three samples")
    ts = [t for t, _ in pairs]
    if any(not t > 0.0 for t in ts):
        raise ValueError("temperatures must be positive")
    if len(set(ts)) != len(ts):
        raise ValueError("temperatures must be distinct")
    if model == "inverse_T":
        basis = [1.0 / t for t in ts]
    else:
        if mu is None or not mu > 0.0:
            raise ValueError("the log_cubed model needs its scale mu > 0")
        if any(t >= mu for t in ts):
            raise ValueError("log_cubed expects samples with T < mu")
        basis = [math.log(mu / t) ** 3 for t in ts]
    vals = [v for _, v in pairs]
    c = math.fsum(v * b for v, b in zip(vals, basis)) \
        / math.fsum(b * b for b in basis)
    devs = []
    for v, b_k in zip(vals, basis):
        pred = c * b_k
        if pred == 0.0:
            devs.append(0.0 if v == 0.0 else math.inf)
        else:
            devs.append(abs(v - pred) / abs(pred))
    return GrowthFit(samples=tuple(pairs), model=model, fitted_constant=c,
                     max_relative_deviation=max(devs))
