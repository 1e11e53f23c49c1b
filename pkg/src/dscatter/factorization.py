"""Evolution group and the factorization U(t) F^-1 = M D_t V(t).

Conventions, with (it)^{1/2} = sqrt(t) e^{i pi/4} throughout:

    M phi(x)      = exp(i x^2 / 2t) phi(x)
    D_t phi(x)    = (it)^{-1/2} phi(x/t)
    V(t) w        = D_t^-1 M^-1 F^-1 exp(-i t k^2/2) w
    V(t)^-1 phi   = exp(i t k^2/2) F(M D_t phi)

V(t) is a function of the similarity variable y = x/t.  It is sampled on
the rescaled grid ``basis.x / t`` so that g(t y) is read off the x-grid
exactly and the factorization holds to rounding.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import fresnel

from .errors import (
    AliasWarning,
    ConfigError,
    GridMismatch,
    NotExceptional,
    ParityMismatch,
    RescaleOutOfRange,
)
from .scattering import Classification, ScatteringData
from .transform import (
    DistortedBasis,
    Parity,
    PhysicalField,
    SpectralField,
    check_decay,
    classical_pair,
    infer_parity,
)

T_MIN = 1.0
_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True, eq=False)
class FactorizationOps:
    """Factorization operators of ``basis`` at time ``t >= 1``."""

    basis: DistortedBasis
    t: float
    sqrt_it: complex = field(init=False)

    def __post_init__(self):
        if not self.t >= T_MIN:
            raise ConfigError(f"factorization diagnostics need t >= {T_MIN}, got {self.t}")
        object.__setattr__(self, "sqrt_it", math.sqrt(self.t) * complex(math.cos(math.pi / 4), math.sin(math.pi / 4)))

    @property
    def y(self) -> np.ndarray:
        """Similarity grid x / t on which V(t) is sampled."""
        return self.basis.x / self.t

    @property
    def window(self) -> float:
        """Half-width min(L/t, k_max) of the resolvable similarity window."""
        return min(self.basis.L / self.t, self.basis.k_max)

    def window_mask(self, y: np.ndarray, trim: float = 0.05) -> np.ndarray:
        """|y| within the window minus its outer ``trim`` fraction."""
        return np.abs(y) <= (1.0 - trim) * self.window


# ------------------------------------------------------------------ evolution


def _phase(k: np.ndarray, t: float) -> np.ndarray:
    return np.exp(-0.5j * t * k * k)


def edge_mass_fraction(values: np.ndarray, fraction: float = 0.1) -> float:
    """Share of the discrete mass in the outer ``fraction`` of the grid."""
    m = np.abs(values) ** 2
    n = len(m)
    e = max(1, int(round(fraction * n / 2)))
    tot = float(np.sum(m))
    return float(np.sum(m[:e]) + np.sum(m[-e:])) / tot if tot > 0 else 0.0


def warn_if_escaping(values: np.ndarray, tol: float = 1e-4, stacklevel: int = 3) -> float:
    frac = edge_mass_fraction(values)
    if frac > tol:
        warnings.warn(f"{frac:.2e} of the mass sits in the outer 10% of the box; enlarge L",
                      AliasWarning, stacklevel=stacklevel)
    return frac


def evolve_linear(b: DistortedBasis, u0, t: float, decay_tol: float = 1e-8) -> PhysicalField:
    """U(t) u0 = F^-1 exp(-i t k^2/2) F u0, for t of either sign."""
    v = u0.values if isinstance(u0, PhysicalField) else np.asarray(u0)
    if v.shape != b.x.shape:
        raise GridMismatch("field is not sampled on the basis x-grid")
    check_decay(v, decay_tol, "physical field")
    out = b.Finv(_phase(b.k, t) * b.F(v))
    warn_if_escaping(out)
    return PhysicalField.from_values(b.x, out)


def apply_V(f: FactorizationOps, w) -> PhysicalField:
    """V(t) w on the similarity grid ``f.y``."""
    b = f.basis
    wv = w.values if isinstance(w, SpectralField) else np.asarray(w)
    if wv.shape != b.k.shape:
        raise GridMismatch("profile is not sampled on the basis k-grid")
    g = b.Finv(_phase(b.k, f.t) * wv)
    y = f.y
    return PhysicalField.from_values(y, f.sqrt_it * np.exp(-0.5j * f.t * y * y) * g)


def apply_V_at(f: FactorizationOps, w, y) -> np.ndarray:
    """V(t) w at arbitrary similarity points ``y`` (cubic interpolation in t y)."""
    y = np.asarray(y, float)
    if np.any(np.abs(f.t * y) > f.basis.L * (1 + 1e-12)):
        raise RescaleOutOfRange(f"t*y leaves the box [-{f.basis.L:g}, {f.basis.L:g}]")
    v = apply_V(f, w)
    g = v.values * np.exp(0.5j * f.t * v.x ** 2) / f.sqrt_it
    xs = f.t * y
    gi = CubicSpline(f.basis.x, g.real)(xs) + 1j * CubicSpline(f.basis.x, g.imag)(xs)
    return f.sqrt_it * np.exp(-0.5j * f.t * y * y) * gi


def apply_MD(f: FactorizationOps, phi) -> PhysicalField:
    """M D_t phi on the x-grid, for phi sampled on ``f.y``."""
    pv = phi.values if isinstance(phi, PhysicalField) else np.asarray(phi)
    if pv.shape != f.basis.x.shape:
        raise GridMismatch("input is not sampled on the similarity grid x/t")
    x = f.basis.x
    return PhysicalField.from_values(x, np.exp(0.5j * x * x / f.t) * pv / f.sqrt_it)


def apply_V_inv(f: FactorizationOps, phi, decay_tol: float = 1e-8) -> SpectralField:
    """V(t)^-1 phi for phi sampled on the similarity grid ``f.y``."""
    b = f.basis
    u = apply_MD(f, phi).values
    check_decay(u, decay_tol, "M D_t phi")
    return SpectralField.from_values(b.k, np.exp(0.5j * f.t * b.k ** 2) * b.F(u))


def apply_V0(f: FactorizationOps, w) -> SpectralField:
    """Free counterpart V0(t) = F0 M F0^-1 on the k-grid."""
    b = f.basis
    F0, F0inv = classical_pair(b.x, b.k)
    wv = w.values if isinstance(w, SpectralField) else np.asarray(w)
    u = F0inv(wv)
    return SpectralField.from_values(b.k, F0(np.exp(0.5j * b.x ** 2 / f.t) * u))


def factorization_defect(f: FactorizationOps, w) -> float:
    """sup_x |U(t) F^-1 w - M D_t V(t) w|."""
    b = f.basis
    wv = w.values if isinstance(w, SpectralField) else np.asarray(w)
    lhs = b.Finv(_phase(b.k, f.t) * wv)
    rhs = apply_MD(f, apply_V(f, wv)).values
    return float(np.max(np.abs(lhs - rhs)))


# ------------------------------------------------------------------ Fresnel


def fresnel_tail(z) -> np.ndarray | complex:
    """int_z^inf exp(-i k^2/2) dk.

    With k = sqrt(pi) s this is sqrt(pi) [(1/2 - C) - i (1/2 - S)] at
    s = z / sqrt(pi), where C, S are the normalized Fresnel integrals.
    scipy evaluates them by power series for small argument and by the
    auxiliary-function asymptotics for large argument.
    """
    z = np.asarray(z, dtype=float)
    S, C = fresnel(z / _SQRT_PI)
    out = _SQRT_PI * ((0.5 - C) - 1j * (0.5 - S))
    return complex(out) if out.ndim == 0 else out


FRESNEL_WEIGHT = np.sqrt(2j / np.pi)


# ------------------------------------------------------------------ expansion residual


def _interp_k(k: np.ndarray, values: np.ndarray, y: np.ndarray) -> np.ndarray:
    return CubicSpline(k, values.real)(y) + 1j * CubicSpline(k, values.imag)(y)


def _zero_sign(s: ScatteringData) -> int:
    if s.classification is not None and s.classification != Classification.EXCEPTIONAL:
        raise NotExceptional("the expansion needs an exceptional potential")
    T0 = s.T0 if s.T0 is not None else s.T[np.argmin(np.abs(s.k))]
    if abs(T0 - 1) < 1e-6:
        return 1
    if abs(T0 + 1) < 1e-6:
        return -1
    raise NotExceptional(f"T(0) = {complex(T0):.6g} is not +-1 (asymmetric exceptional potential)")


@dataclass(frozen=True)
class ExpansionResidual:
    t: float
    residual: float
    window: float
    y: np.ndarray
    pointwise: np.ndarray


def expansion_profile(f: FactorizationOps, w, s: ScatteringData, trim: float = 0.05) -> ExpansionResidual:
    """Pointwise V(t)w - T(|y|)w(y) - R(|y|)w(-y) - correction over the window.

    The correction vanishes for T(0) = 1.  For T(0) = -1 it is
    sqrt(2i/pi) w(0) * fresnel_tail(sqrt(t)|y|), the boundary layer that
    restores continuity at y = 0.
    """
    b = f.basis
    wv = w.values if isinstance(w, SpectralField) else np.asarray(w)
    sign = _zero_sign(s)
    par = infer_parity(wv, tol=1e-6)
    want = Parity.ODD if sign == 1 else Parity.EVEN
    if par != want:
        raise ParityMismatch(f"T(0) = {sign:+d} needs a {want.value} profile, got {par.value}")
    v = apply_V(f, wv)
    mask = f.window_mask(v.x, trim)
    y = v.x[mask]
    T, R = s.at(y)
    wy = _interp_k(b.k, wv, y)
    wmy = _interp_k(b.k, wv, -y)
    r = v.values[mask] - T * wy - R * wmy
    if sign == -1:
        w0 = wv[len(b.k) // 2]
        r = r - FRESNEL_WEIGHT * w0 * fresnel_tail(math.sqrt(f.t) * np.abs(y))
    return ExpansionResidual(f.t, float(np.max(np.abs(r))), float((1 - trim) * f.window), y, r)


def expansion_residual_L1(f: FactorizationOps, w, s: ScatteringData) -> float:
    """sup over the resolvable window of the leading-order expansion error of V(t)w."""
    return expansion_profile(f, w, s).residual


def fit_loglog_slope(t, r) -> float:
    """Least-squares slope of log r against log t."""
    return float(np.polyfit(np.log(np.asarray(t, float)), np.log(np.asarray(r, float)), 1)[0])


__all__ = [
    "FactorizationOps",
    "ExpansionResidual",
    "evolve_linear",
    "apply_V",
    "apply_V_at",
    "apply_V_inv",
    "apply_V0",
    "apply_MD",
    "factorization_defect",
    "fresnel_tail",
    "expansion_profile",
    "expansion_residual_L1",
    "edge_mass_fraction",
    "fit_loglog_slope",
    "FRESNEL_WEIGHT",
    "T_MIN",
]
