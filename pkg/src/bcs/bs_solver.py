"""Translation-invariant Birman-Schwinger problem in the s-wave sector.

The operator V^(1/2) B_T(p, 0) |V|^(1/2) is discretized on a radial momentum
grid whose panels condense geometrically onto the Fermi surface in the shifted
variable u = p^2 - mu, so temperatures down to 1e-16 mu stay resolved.  Its
top eigenvalue a_T fixes the critical temperature through lam * a_T = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg as _la
from scipy import optimize as _opt
from scipy.interpolate import CubicSpline

from .kernels import KernelParams, bt_radial_shifted
from .potentials import (GaussianPotential, RadialPotential, e_mu,
                         fourier_hat)
from .quad import QuadSpec, integrate_finite

_SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


class SolverError(Exception):
    """Eigenvalue problem or temperature search failed its contract."""


@dataclass(frozen=True)
class SWaveDiscretization:
    """Radial momentum grid with Fermi-surface-exact shifted coordinates.

    ``shifted`` holds a_i = p_i^2 - mu computed in the u variable where the
    panels were laid out, so near-surface values keep full precision even
    when p_i - sqrt(mu) is below machine epsilon.
    """

    mu: float
    nodes: np.ndarray
    weights: np.ndarray
    shifted: np.ndarray
    p_max: float
    refinement_scale: float

    def __post_init__(self):
        p, w, a = self.nodes, self.weights, self.shifted
        if p.ndim != 1 or p.shape != w.shape or p.shape != a.shape:
            raise ValueError("nodes, weights and shifted must be matching 1-d arrays")
        if p[0] <= 0 or np.any(np.diff(p) < 0):
            raise ValueError("nodes must be positive and nondecreasing")
        # strict ordering lives in the shifted coordinate: p values within
        # machine epsilon of the Fermi momentum legitimately tie
        if np.any(np.diff(a) <= 0):
            raise ValueError("shifted coordinates must be strictly increasing")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(float(np.sum(w)) - self.p_max) > 1e-8 * self.p_max:
            raise ValueError("weights do not resolve the identity up to p_max")
        if a[0] >= 0 or a[-1] <= 0 or np.any(a == 0.0):
            raise ValueError("Fermi surface must lie strictly between grid shells")

    def __len__(self):
        return len(self.nodes)


@lru_cache(maxsize=64)
def _gl(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panel_nodes(edges, n_per_panel):
    """Gauss-Legendre nodes/weights on each [edges[k], edges[k+1]]."""
    x, w = _gl(n_per_panel)
    lo = np.asarray(edges[:-1])[:, None]
    hi = np.asarray(edges[1:])[:, None]
    nodes = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w[None, :]
    return nodes.ravel(), weights.ravel()


def _geometric_edges(width, cap, growth):
    edges = [0.0, width]
    while edges[-1] < cap:
        edges.append(min(edges[-1] * growth, cap))
    return edges


def _split(edges, level):
    for _ in range(level):
        e = np.asarray(edges)
        edges = np.sort(np.concatenate([e, 0.5 * (e[:-1] + e[1:])]))
    return list(edges)


def build_grid(params: KernelParams, V: RadialPotential | None = None, *,
               n_per_panel: int = 10, growth: float = 2.0,
               refine_level: int = 0) -> SWaveDiscretization:
    """Lay out the radial grid for the given temperature and potential range.

    The Fermi shell |p^2 - mu| < mu/2 is paneled geometrically in u = p^2 - mu
    from an innermost width min(T, 1e-3 mu); outside the shell plain p panels
    run down to 0 and up to p_max.  refine_level = k halves every panel k times.
    """
    T, mu = params.T, params.mu
    sq_mu = math.sqrt(mu)
    reach = 12.0 / V.range_scale if V is not None else 0.0
    p_max = max(4.0 * math.sqrt(2.0 * mu), sq_mu + reach)

    w_in = min(T, 1e-3 * mu)
    u_edges = _split(_geometric_edges(w_in, 0.5 * mu, growth), refine_level)

    u_nodes, u_w = _panel_nodes(u_edges, n_per_panel)
    ps, ws, sh = [], [], []
    for sign in (1.0, -1.0):
        a = sign * u_nodes
        p = np.sqrt(mu + a)
        ps.append(p)
        ws.append(u_w / (2.0 * p))
        sh.append(a)

    p_lo = math.sqrt(0.5 * mu)
    p_hi = math.sqrt(1.5 * mu)
    width = 0.25 * sq_mu
    lo_edges = _split(np.linspace(0.0, p_lo, max(3, math.ceil(p_lo / width)) + 1),
                      refine_level)
    hi_edges = _split(np.linspace(p_hi, p_max, max(3, math.ceil((p_max - p_hi) / width)) + 1),
                      refine_level)
    for edges in (lo_edges, hi_edges):
        p, w = _panel_nodes(edges, n_per_panel)
        ps.append(p)
        ws.append(w)
        sh.append(p * p - mu)

    a = np.concatenate(sh)
    order = np.argsort(a)
    grid = SWaveDiscretization(
        mu=mu, nodes=np.concatenate(ps)[order], weights=np.concatenate(ws)[order],
        shifted=a[order], p_max=p_max,
        refinement_scale=w_in / (2.0 * sq_mu))
    if grid.refinement_scale > T / sq_mu:
        raise SolverError("innermost panel too coarse for this temperature")
    return grid


@lru_cache(maxsize=16)
def _vhat_spline(V: RadialPotential, k_max: float):
    ks = np.linspace(0.0, k_max, 4097)
    vals = np.array([fourier_hat(V, k) for k in ks])
    return CubicSpline(ks, vals)


def angular_average_vhat(V: RadialPotential, p: float, q: float) -> float:
    """Average of Vhat over the angle between two momenta of lengths p, q.

    This is the s-wave kernel w_d(p, q); the d = 1 "angle" is the two-point
    average over relative signs.
    """
    if p < 0 or q < 0:
        raise ValueError("momenta must be nonnegative")
    if V.d == 1:
        return (fourier_hat(V, abs(p - q)) + fourier_hat(V, p + q)) / math.sqrt(2.0 * math.pi)
    spec = QuadSpec(abs_tol=1e-12, rel_tol=1e-11, max_evals=4000)
    if V.d == 2:
        r = integrate_finite(
            lambda th: fourier_hat(V, math.sqrt(max(
                p * p + q * q - 2.0 * p * q * math.cos(th), 0.0))),
            0.0, math.pi, spec)
        return r.value / math.pi
    r = integrate_finite(
        lambda s: fourier_hat(V, math.sqrt(max(p * p + q * q - 2.0 * p * q * s, 0.0))),
        -1.0, 1.0, spec)
    return r.value / math.sqrt(2.0 * math.pi)


def _w_matrix(V: RadialPotential, p: np.ndarray) -> np.ndarray:
    """w_d(p_i, p_j) on the full grid, vectorized per dimension."""
    d = V.d
    if d == 3 and isinstance(V, GaussianPotential):
        # closed form: the angular integral of a Gaussian Vhat is an
        # exponential difference, written via expm1 so p q -> 0 is stable
        ell2 = V.ell * V.ell
        pref = V.a * (0.5 * ell2) ** 1.5 / math.sqrt(2.0 * math.pi)
        diff2 = (p[:, None] - p[None, :]) ** 2
        c = 0.5 * ell2 * p[:, None] * p[None, :]
        return pref * np.exp(-0.25 * ell2 * diff2) * (-np.expm1(-2.0 * c)) / c

    k_max = 2.0 * float(p[-1]) * 1.0001
    spline = _vhat_spline(V, k_max)
    n = len(p)
    if d == 1:
        return (spline(np.abs(p[:, None] - p[None, :]))
                + spline(p[:, None] + p[None, :])) / math.sqrt(2.0 * math.pi)
    ns = 64
    x, w = _gl(ns)
    out = np.empty((n, n))
    p2 = p * p
    if d == 2:
        th = 0.5 * math.pi * (x + 1.0)
        cw = (0.5 * w) * np.ones_like(th)
        cos_th = np.cos(th)
        for i0 in range(0, n, 64):
            i1 = min(i0 + 64, n)
            k2 = p2[i0:i1, None, None] + p2[None, :, None] \
                - 2.0 * (p[i0:i1, None, None] * p[None, :, None]) * cos_th[None, None, :]
            out[i0:i1] = spline(np.sqrt(np.maximum(k2, 0.0))) @ cw
        return out
    sw = 0.5 * w
    for i0 in range(0, n, 64):
        i1 = min(i0 + 64, n)
        k2 = p2[i0:i1, None, None] + p2[None, :, None] \
            - 2.0 * (p[i0:i1, None, None] * p[None, :, None]) * x[None, None, :]
        out[i0:i1] = (spline(np.sqrt(np.maximum(k2, 0.0))) @ sw) * math.sqrt(2.0 / math.pi)
    return out * 0.5  # (1/sqrt(2 pi)) * GL over s in [-1, 1]


def build_matrix(V: RadialPotential, params: KernelParams, grid: SWaveDiscretization,
                 *, _w: np.ndarray | None = None) -> np.ndarray:
    """Symmetrized Birman-Schwinger matrix on the grid.

    Entries sqrt(w_i w_j) (p_i p_j)^((d-1)/2) sqrt(B_i B_j) w_d(p_i, p_j);
    assembly is symmetric by construction, bit for bit.
    """
    if not V.is_nonnegative():
        raise ValueError("Birman-Schwinger symmetrization needs V >= 0")
    if abs(grid.mu - params.mu) > 1e-15 * params.mu:
        raise ValueError("grid and kernel parameters disagree on mu")
    B = bt_radial_shifted(grid.shifted, params)
    s = np.sqrt(grid.weights) * grid.nodes ** (0.5 * (V.d - 1)) * np.sqrt(B)
    W = _w_matrix(V, grid.nodes) if _w is None else _w
    return s[:, None] * s[None, :] * W


@dataclass(frozen=True)
class SpectralResult:
    eigenvalue: float
    eigenvector: np.ndarray
    residual: float
    second_eigenvalue: float | None = None


def top_eigenvalue(S: np.ndarray, weights: np.ndarray | None = None) -> SpectralResult:
    """Largest eigenvalue and eigenvector of a symmetric matrix.

    The eigenvector sign is fixed by a positive weighted sum (plain sum if no
    weights are given) and the 2-norm residual ||S u - a u|| is reported.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("S must be square")
    if not np.allclose(S, S.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(S).max()))):
        raise ValueError("S must be symmetric")
    n = S.shape[0]
    if n == 1:
        return SpectralResult(float(S[0, 0]), np.ones(1), 0.0, None)
    vals, vecs = _la.eigh(S, subset_by_index=[n - 2, n - 1])
    top, second = float(vals[1]), float(vals[0])
    u = vecs[:, 1]
    sign_stat = float(np.sum(weights * u)) if weights is not None else float(np.sum(u))
    if sign_stat < 0:
        u = -u
    residual = float(np.linalg.norm(S @ u - top * u))
    return SpectralResult(top, u, residual, second)


def _power_top(s: np.ndarray, W: np.ndarray, v0: np.ndarray | None,
               tol: float = 1e-13, max_iter: int = 600):
    """Top eigenvalue of diag(s) W diag(s) by warm-started power iteration."""
    n = len(s)
    v = np.ones(n) / math.sqrt(n) if v0 is None else v0.copy()
    lam = 0.0
    for _ in range(max_iter):
        u = s * (W @ (s * v))
        nrm = np.linalg.norm(u)
        if nrm == 0.0:
            raise SolverError("matrix annihilated the iterate; potential too weak")
        u /= nrm
        new = float(u @ (s * (W @ (s * u))))
        if abs(new - lam) <= tol * max(abs(new), 1e-300) and float(np.abs(u @ v)) > 0.999999:
            return new, u
        lam, v = new, u
    return lam, v


def a_t0(V: RadialPotential, params: KernelParams, *, rel_accuracy: float = 1e-7,
         max_refine: int = 3, grid: SWaveDiscretization | None = None) -> float:
    """Largest Birman-Schwinger value a_T at fixed temperature.

    Refines the grid (panel halving) until successive values agree to
    rel_accuracy; raises SolverError if max_refine levels do not converge.
    """
    if grid is not None:
        return top_eigenvalue(build_matrix(V, params, grid)).eigenvalue
    prev = None
    for level in range(max_refine + 1):
        g = build_grid(params, V, refine_level=level)
        val = top_eigenvalue(build_matrix(V, params, g)).eigenvalue
        if prev is not None and abs(val - prev) <= rel_accuracy * abs(val):
            return val
        prev = val
    raise SolverError(f"a_T did not converge to {rel_accuracy} in {max_refine} refinements")


@dataclass(frozen=True)
class Tc0Result:
    T_c: float
    lam: float
    closure: float          # |lam * a_T - 1| on the final refined grid
    refine_level: int
    grid_size: int


def tc0(V: RadialPotential, mu: float, d: int, lam: float, *,
        t_min_factor: float = 1e-8, t_max_factor: float = 1e3,
        tol: float = 1e-8, max_refine: int = 3) -> Tc0Result:
    """Critical temperature of the translation-invariant problem at coupling lam.

    Brackets by doubling/halving from T = mu, then alternates Brent's method
    in log T on a frozen grid with grid refinement until the closure
    |lam * a_Tc - 1| meets tol on the finer grid.
    """
    if d != V.d:
        raise ValueError("potential dimension disagrees with requested d")
    if lam <= 0:
        raise ValueError("lam must be positive")
    em = e_mu(V, mu)
    if em <= 0:
        raise SolverError("Fermi-surface coupling e_mu is not positive; no pairing instability")

    cache = {}

    def f(T, level, v0=None):
        key = (T, level)
        if key not in cache:
            g = build_grid(KernelParams(T=T, mu=mu), V, refine_level=level)
            W = _w_matrix(V, g.nodes)
            B = bt_radial_shifted(g.shifted, KernelParams(T=T, mu=mu))
            s = np.sqrt(g.weights) * g.nodes ** (0.5 * (d - 1)) * np.sqrt(B)
            a, _ = _power_top(s, W, v0)
            cache[key] = lam * a - 1.0
        return cache[key]

    T = mu
    val = f(T, 0)
    if val > 0.0:
        T_lo = T
        while val > 0.0:
            T *= 2.0
            if T > t_max_factor * mu:
                raise SolverError(f"T_c exceeds t_max_factor*mu = {t_max_factor * mu:.3e}")
            T_lo, val = T / 2.0, f(T, 0)
        T_hi = T
    else:
        T_hi = T
        while val <= 0.0:
            T /= 2.0
            if T < t_min_factor * mu:
                raise SolverError(
                    f"T_c not bracketed above t_min_factor*mu = {t_min_factor * mu:.3e}; "
                    "the coupling may be too weak for the allowed range")
            T_hi, val = T * 2.0, f(T, 0)
        T_lo = T

    # frozen-grid Brent in log T, then verify closure on a once-refined grid
    T_star = math.sqrt(T_lo * T_hi)
    for level in range(max_refine + 1):
        g = build_grid(KernelParams(T=T_lo, mu=mu), V, refine_level=level)
        W = _w_matrix(V, g.nodes)
        state = {"v": None}

        def g_of_lnt(lnT):
            T = math.exp(lnT)
            B = bt_radial_shifted(g.shifted, KernelParams(T=T, mu=mu))
            s = np.sqrt(g.weights) * g.nodes ** (0.5 * (d - 1)) * np.sqrt(B)
            a, v = _power_top(s, W, state["v"])
            state["v"] = v
            return lam * a - 1.0

        lo, hi = math.log(T_lo), math.log(T_hi)
        glo, ghi = g_of_lnt(lo), g_of_lnt(hi)
        if not (glo > 0.0 > ghi):
            # refinement moved the root across a bracket edge; widen a step
            while glo <= 0.0:
                lo -= math.log(2.0)
                if math.exp(lo) < t_min_factor * mu:
                    raise SolverError("bracket lost below t_min_factor*mu during refinement")
                glo = g_of_lnt(lo)
            while ghi >= 0.0:
                hi += math.log(2.0)
                if math.exp(hi) > t_max_factor * mu:
                    raise SolverError("bracket lost above t_max_factor*mu during refinement")
                ghi = g_of_lnt(hi)
        ln_root = _opt.brentq(g_of_lnt, lo, hi, xtol=1e-14, rtol=8.9e-16)
        T_star = math.exp(ln_root)

        fine = min(level + 1, max_refine)
        closure = abs(f(T_star, fine))
        if closure <= tol:
            g_final = build_grid(KernelParams(T=T_star, mu=mu), V, refine_level=fine)
            return Tc0Result(T_c=T_star, lam=lam, closure=closure,
                             refine_level=fine, grid_size=len(g_final))
        # tighten the bracket around the current estimate for the next level
        T_lo, T_hi = 0.5 * T_star, 2.0 * T_star
    raise SolverError(f"closure |lam*a-1| stayed above {tol} after {max_refine} refinements")


@dataclass(frozen=True)
class GroundState:
    mu: float
    d: int
    lam: float
    T_c: float
    grid: SWaveDiscretization
    phi_hat: np.ndarray
    spectral_gap: float
    eval_eq_residual: float
    closure: float


def ground_state(V: RadialPotential, mu: float, d: int, lam: float, *,
                 tc: Tc0Result | None = None, **tc_kwargs) -> GroundState:
    """Normalized s-wave ground state at the critical temperature.

    phi_hat solves phi = lam B_T (V phi)^ on the grid; it is scaled so
    <phi, V phi> = |S^(d-1)| e_mu and signed positive at the Fermi surface.
    Raises SolverError when the top of the spectrum is nearly degenerate.
    """
    if tc is None:
        tc = tc0(V, mu, d, lam, **tc_kwargs)
    params = KernelParams(T=tc.T_c, mu=mu)
    grid = build_grid(params, V, refine_level=tc.refine_level)
    W = _w_matrix(V, grid.nodes)
    S = build_matrix(V, params, grid, _w=W)
    res = top_eigenvalue(S, weights=grid.weights)
    gap = (res.eigenvalue - res.second_eigenvalue) / res.eigenvalue
    if gap < 1e-8:
        raise SolverError(f"near-degenerate ground state: relative gap {gap:.2e}")

    B = bt_radial_shifted(grid.shifted, params)
    p_pow = grid.nodes ** (0.5 * (d - 1))
    phi = np.sqrt(B) * res.eigenvector / (np.sqrt(grid.weights) * p_pow)

    meas = grid.weights * grid.nodes ** (d - 1)
    ip = _SPHERE_AREA[d] * float((meas * phi) @ W @ (meas * phi))
    target = _SPHERE_AREA[d] * e_mu(V, mu)
    phi = phi * math.sqrt(target / ip)

    rhs = lam * B * (W @ (meas * phi))
    eval_res = float(np.max(np.abs(phi - rhs)) / np.max(np.abs(phi)))
    return GroundState(mu=mu, d=d, lam=lam, T_c=tc.T_c, grid=grid, phi_hat=phi,
                       spectral_gap=gap, eval_eq_residual=eval_res,
                       closure=abs(lam * res.eigenvalue - 1.0))


def position_profile(state: GroundState, r) -> np.ndarray:
    """Position-space radial profile of the ground state.

    Phi(r) = sum_i w_i p_i^(d-1) phi_hat_i j_d(r; p_i^2), the inverse radial
    Fourier transform of the s-wave density phi_hat.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    p = state.grid.nodes
    coef = state.grid.weights * p ** (state.d - 1) * state.phi_hat
    z = p[:, None] * r[None, :]
    if state.d == 1:
        kern = math.sqrt(2.0 / math.pi) * np.cos(z)
    elif state.d == 2:
        from scipy.special import j0
        kern = j0(z)
    else:
        kern = math.sqrt(2.0 / math.pi) * np.sinc(z / math.pi)
    return coef @ kern
