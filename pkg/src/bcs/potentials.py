"""Radial potential profiles in d = 1, 2, 3 and the spherically reduced
quantities built from them: Fourier transforms, moments, the Fermi-surface
coupling e_mu, and its angular-momentum decomposition."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .quad import QuadSpec, integrate_finite
from .special import j_d

_SPHERE_AREA = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}


class ExtrapolationWarning(UserWarning):
    """A tabulated potential was evaluated beyond its last node."""


@dataclass(frozen=True)
class RadialPotential:
    """Base type: a rotation-invariant potential V(|x|) on R^d."""

    d: int

    def _validate_d(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"d must be 1, 2 or 3, got {self.d}")

    def value(self, r):
        raise NotImplementedError

    def cutoff_radius(self, eps: float = 1e-16) -> float:
        """Radius beyond which |V| stays below eps * (peak scale)."""
        raise NotImplementedError

    @property
    def range_scale(self) -> float:
        """Characteristic decay length, used to size momentum cutoffs."""
        raise NotImplementedError

    def is_nonnegative(self) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianPotential(RadialPotential):
    a: float = 1.0
    ell: float = 1.0

    def __post_init__(self):
        self._validate_d()
        if not (self.ell > 0 and math.isfinite(self.a)):
            raise ValueError("need ell > 0 and finite amplitude")

    def value(self, r):
        r = np.asarray(r, dtype=float)
        out = self.a * np.exp(-((r / self.ell) ** 2))
        return out if out.ndim else float(out)

    def cutoff_radius(self, eps=1e-16):
        return self.ell * math.sqrt(math.log(1.0 / eps))

    @property
    def range_scale(self):
        return self.ell

    def is_nonnegative(self):
        return self.a >= 0


@dataclass(frozen=True)
class ExponentialPotential(RadialPotential):
    a: float = 1.0
    ell: float = 1.0

    def __post_init__(self):
        self._validate_d()
        if not (self.ell > 0 and math.isfinite(self.a)):
            raise ValueError("need ell > 0 and finite amplitude")

    def value(self, r):
        r = np.asarray(r, dtype=float)
        out = self.a * np.exp(-r / self.ell)
        return out if out.ndim else float(out)

    def cutoff_radius(self, eps=1e-16):
        return self.ell * math.log(1.0 / eps)

    @property
    def range_scale(self):
        return self.ell

    def is_nonnegative(self):
        return self.a >= 0


@dataclass(frozen=True)
class StepPotential(RadialPotential):
    """a on [0, R], zero outside."""

    a: float = 1.0
    R: float = 1.0

    def __post_init__(self):
        self._validate_d()
        if not (self.R > 0 and math.isfinite(self.a)):
            raise ValueError("need R > 0 and finite amplitude")

    def value(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.R, self.a, 0.0)
        return out if out.ndim else float(out)

    def cutoff_radius(self, eps=1e-16):
        return self.R

    @property
    def range_scale(self):
        return self.R

    def is_nonnegative(self):
        return self.a >= 0


@dataclass(frozen=True)
class TabulatedPotential(RadialPotential):
    """Monotone-cubic interpolant through (r_i, v_i); zero beyond the last node.

    The samples must already have decayed at the last node
    (|v_last| <= 1e-12 * max|v|), otherwise the zero extension would
    misrepresent the tail.
    """

    r_values: tuple = ()
    v_values: tuple = ()

    def __post_init__(self):
        self._validate_d()
        r = np.asarray(self.r_values, dtype=float)
        v = np.asarray(self.v_values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 4:
            raise ValueError("need matching 1-d r/v samples, at least 4 points")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise ValueError("r samples must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("v samples must be finite")
        vmax = float(np.max(np.abs(v)))
        if vmax == 0.0:
            raise ValueError("potential is identically zero")
        if abs(v[-1]) > 1e-12 * vmax:
            raise ValueError("tabulated potential has not decayed at its last node")
        from scipy.interpolate import PchipInterpolator
        object.__setattr__(self, "_interp", PchipInterpolator(r, v, extrapolate=False))

    def value(self, r):
        r = np.asarray(r, dtype=float)
        r_last = self.r_values[-1]
        if np.any(r > r_last):
            warnings.warn(
                f"evaluating tabulated potential beyond its last node r={r_last}; using 0",
                ExtrapolationWarning, stacklevel=2)
        out = self._interp(np.clip(r, self.r_values[0], r_last))
        out = np.where(r > r_last, 0.0, out)
        return out if out.ndim else float(out)

    def cutoff_radius(self, eps=1e-16):
        return float(self.r_values[-1])

    @property
    def range_scale(self):
        r = np.asarray(self.r_values)
        v = np.abs(np.asarray(self.v_values))
        # half-maximum crossing as a rough decay length
        peak = v.max()
        below = np.nonzero(v <= 0.5 * peak)[0]
        after_peak = below[below >= int(np.argmax(v))]
        i = int(after_peak[0]) if len(after_peak) else len(r) - 1
        return float(max(r[i], r[-1] / 8.0))

    def is_nonnegative(self):
        return bool(np.min(np.asarray(self.v_values)) >= -1e-12 * np.max(np.abs(self.v_values)))


_KINDS = {
    "gaussian": (GaussianPotential, ("a", "ell")),
    "exponential": (ExponentialPotential, ("a", "ell")),
    "step": (StepPotential, ("a", "R")),
    "tabulated": (TabulatedPotential, ("r_values", "v_values")),
}


def from_config(cfg: dict) -> RadialPotential:
    """Build a potential from a JSON-style dict with a "kind" tag."""
    if "kind" not in cfg:
        raise ValueError("potential config needs a 'kind' field")
    kind = cfg["kind"]
    if kind not in _KINDS:
        raise ValueError(f"unknown potential kind {kind!r}; choose from {sorted(_KINDS)}")
    cls, fields = _KINDS[kind]
    unknown = set(cfg) - set(fields) - {"kind", "d"}
    if unknown:
        raise ValueError(f"unknown potential fields for kind {kind!r}: {sorted(unknown)}")
    if "d" not in cfg:
        raise ValueError("potential config needs the dimension 'd'")
    kwargs = {f: cfg[f] for f in fields if f in cfg}
    for key in ("r_values", "v_values"):
        if key in kwargs:
            kwargs[key] = tuple(float(x) for x in kwargs[key])
    return cls(d=int(cfg["d"]), **kwargs)


def to_config(V: RadialPotential) -> dict:
    """Inverse of from_config."""
    for kind, (cls, fields) in _KINDS.items():
        if type(V) is cls:
            cfg = {"kind": kind, "d": V.d}
            for f in fields:
                val = getattr(V, f)
                cfg[f] = list(val) if isinstance(val, tuple) else val
            return cfg
    raise ValueError(f"unregistered potential type {type(V).__name__}")


def v_of_r(V: RadialPotential, r):
    """Pointwise radial values V(r), elementwise."""
    return V.value(r)


@lru_cache(maxsize=256)
def _radial_moment(V: RadialPotential, n: int) -> float:
    rc = V.cutoff_radius()
    spec = QuadSpec(abs_tol=1e-13, rel_tol=1e-12,
                    singular_points=(V.R,) if isinstance(V, StepPotential) else ())
    return integrate_finite(lambda r: V.value(r) * r ** n, 0.0, rc, spec).value


def moment(V: RadialPotential, n: int) -> float:
    """Full-space moment: integral of V(|x|) |x|^n over R^d."""
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    return _SPHERE_AREA[V.d] * _radial_moment(V, n + V.d - 1)


def fourier_hat(V: RadialPotential, k) -> float:
    """Radial Fourier transform with the (2 pi)^(-d/2) convention.

    d = 3 switches to the even Taylor expansion of sin(kr)/(kr) once
    k * cutoff < 1e-3, where the direct form loses digits to cancellation.
    """
    k = float(k)
    if k < 0:
        raise ValueError("k must be nonnegative")
    rc = V.cutoff_radius()
    spec = QuadSpec(abs_tol=1e-13, rel_tol=1e-12,
                    singular_points=(V.R,) if isinstance(V, StepPotential) else ())
    c = math.sqrt(2.0 / math.pi)
    if V.d == 1:
        return integrate_finite(lambda r: V.value(r) * math.cos(k * r), 0.0, rc, spec).value * c
    if V.d == 2:
        return integrate_finite(lambda r: V.value(r) * _sp.j0(k * r) * r, 0.0, rc, spec).value
    if k * rc < 1e-3:
        m2 = _radial_moment(V, 2)
        m4 = _radial_moment(V, 4)
        m6 = _radial_moment(V, 6)
        return c * (m2 - k * k * m4 / 6.0 + k ** 4 * m6 / 120.0)
    return integrate_finite(
        lambda r: V.value(r) * math.sin(k * r) * r, 0.0, rc, spec).value * c / k


def e_mu(V: RadialPotential, mu: float) -> float:
    """Fermi-surface coupling: integral of V(r) j_d(r; mu)^2 r^(d-1) dr."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    rc = V.cutoff_radius()
    spec = QuadSpec(abs_tol=1e-13, rel_tol=1e-12,
                    singular_points=(V.R,) if isinstance(V, StepPotential) else ())
    d = V.d
    return integrate_finite(
        lambda r: V.value(r) * j_d(r, mu, d) ** 2 * r ** (d - 1), 0.0, rc, spec).value


def e_mu_sphere_average(V: RadialPotential, mu: float) -> float:
    """e_mu computed from the momentum side, as the Fermi-sphere average of
    Vhat over pair separations; cross-checks the position-space route."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    s2mu = math.sqrt(2.0 * mu)
    inv_sqrt_2pi = 1.0 / math.sqrt(2.0 * math.pi)
    if V.d == 1:
        return (fourier_hat(V, 0.0) + fourier_hat(V, 2.0 * math.sqrt(mu))) * inv_sqrt_2pi
    spec = QuadSpec(abs_tol=1e-11, rel_tol=1e-10, max_evals=4000)
    if V.d == 2:
        r = integrate_finite(
            lambda th: fourier_hat(V, 2.0 * math.sqrt(mu) * abs(math.sin(0.5 * th))),
            0.0, math.pi, spec)
        return r.value / math.pi
    r = integrate_finite(
        lambda s: fourier_hat(V, s2mu * math.sqrt(max(1.0 - s, 0.0))),
        -1.0, 1.0, spec)
    return r.value * inv_sqrt_2pi


def vmu_spectrum(V: RadialPotential, mu: float, ell_max: int) -> np.ndarray:
    """Angular-momentum components of Vhat restricted to the Fermi sphere.

    Returns (v_0, ..., v_ell_max); v_0 equals e_mu.  d = 1 has no angular
    decomposition (the Fermi "sphere" is two points) and is rejected.
    """
    if V.d == 1:
        raise ValueError(
            "d=1 has no angular harmonics; use e_mu, the single coupling number")
    if mu <= 0:
        raise ValueError("mu must be positive")
    if ell_max < 0:
        raise ValueError("ell_max must be nonnegative")
    spec = QuadSpec(abs_tol=1e-11, rel_tol=1e-10, max_evals=4000)
    out = np.empty(ell_max + 1)
    if V.d == 2:
        for ell in range(ell_max + 1):
            r = integrate_finite(
                lambda th, ell=ell: fourier_hat(
                    V, 2.0 * math.sqrt(mu) * abs(math.sin(0.5 * th))) * math.cos(ell * th),
                0.0, math.pi, spec)
            out[ell] = r.value / math.pi
        return out
    s2mu = math.sqrt(2.0 * mu)
    inv_sqrt_2pi = 1.0 / math.sqrt(2.0 * math.pi)
    for ell in range(ell_max + 1):
        r = integrate_finite(
            lambda s, ell=ell: fourier_hat(
                V, s2mu * math.sqrt(max(1.0 - s, 0.0))) * _sp.eval_legendre(ell, s),
            -1.0, 1.0, spec)
        out[ell] = r.value * inv_sqrt_2pi
    return out
