"""Transmission and reflection coefficients and zero-energy data.

T and R+- come from Wronskians of the Jost solutions,

    1/T(k)     =  [f+(k), f-(k)]  / (2ik)
    R-(k)/T(k) = -[f+(k), f-(-k)] / (2ik)
    R+(k)/T(k) = -[f+(-k), f-(k)] / (2ik)

with f(-k) = conj(f(k)) for real V, so only k >= 0 columns are needed.  The
integral representations are kept as an independent cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import NotExceptional, NumericalGuardError, UnitarityDefect, ZeroWronskian
from .jost import C_V, JostField, MINUS, PLUS
from .potential import SampledPotential


class Classification(str, enum.Enum):
    GENERIC = "generic"
    EXCEPTIONAL = "exceptional"


@dataclass(frozen=True, eq=False)
class ScatteringData:
    """Scattering coefficients on ``k``.

    Entries at k = 0 hold the zero-energy limits (T0, R0) when they are
    known; ``classification``, ``wronskian0`` and ``a_limit`` are filled by
    :func:`classify` and are ``None`` until then.
    """

    k: np.ndarray
    T: np.ndarray
    Rp: np.ndarray
    Rm: np.ndarray
    wronskian0: complex | None = None
    a_limit: float | None = None
    classification: Classification | None = None
    T0: complex | None = None
    R0: complex | None = None

    def unitarity_defect(self) -> np.ndarray:
        t2 = np.abs(self.T) ** 2
        return np.maximum(np.abs(t2 + np.abs(self.Rp) ** 2 - 1), np.abs(t2 + np.abs(self.Rm) ** 2 - 1))

    def offdiagonal_defect(self) -> np.ndarray:
        return np.abs(self.T * np.conj(self.Rm) + np.conj(self.T) * self.Rp)

    def reflection_asymmetry(self) -> np.ndarray:
        return np.abs(self.Rp - self.Rm)

    def at(self, k) -> tuple[np.ndarray, np.ndarray]:
        """(T(|k|), R(|k|)) by linear interpolation on the sampled k >= 0.

        Uses R = R+; for symmetric potentials R+ = R-.
        """
        kk = np.abs(np.asarray(k, dtype=float))
        order = np.argsort(self.k)
        ks = self.k[order]
        keep = ks >= 0
        ks, T, R = ks[keep], self.T[order][keep], self.Rp[order][keep]
        Ti = np.interp(kk, ks, T.real) + 1j * np.interp(kk, ks, T.imag)
        Ri = np.interp(kk, ks, R.real) + 1j * np.interp(kk, ks, R.imag)
        return Ti, Ri


def _w_plus_minus(mp, dmp, mm, dmm, k):
    """[f+, f-] in terms of the modified solutions."""
    return mm * dmp - mp * dmm + 2j * k * mp * mm


def _match_row(jp: JostField, x_match: float | None) -> int:
    if x_match is None:
        return len(jp.x) // 2
    return jp.x_index(x_match)


def compute_coefficients(jp: JostField, jm: JostField, x_match: float | None = 0.0,
                         check: bool = True, tol: float = 1e-6) -> ScatteringData:
    """T, R+ and R- for every nonzero k of the shared k-grid.

    Zero entries of the grid are left as NaN (see :func:`zero_energy_limits`
    and :func:`classify`).  With ``check`` the unitarity and off-diagonal
    identities are enforced at ``tol`` and :class:`UnitarityDefect` raised
    otherwise.  ``x_match=None`` matches at the middle stored row.
    """
    if jp.sign != PLUS or jm.sign != MINUS:
        raise ValueError("need the plus field first, then the minus field")
    if not np.array_equal(jp.k, jm.k):
        raise ValueError("Jost fields must share their k-grid")
    if not np.array_equal(jp.x, jm.x):
        raise ValueError("Jost fields must share their x rows")
    i = _match_row(jp, x_match)
    x_match = float(jp.x[i])
    k = jp.k
    mp, dmp = jp.m[i], jp.dm_dx[i]
    mm, dmm = jm.m[i], jm.dm_dx[i]
    nz = k != 0
    T = np.full(k.shape, np.nan + 0j)
    Rp = np.full(k.shape, np.nan + 0j)
    Rm = np.full(k.shape, np.nan + 0j)
    w = _w_plus_minus(mp, dmp, mm, dmm, k)
    if np.any(np.abs(w[nz]) < 1e-12):
        raise ZeroWronskian("[f+, f-] vanished at nonzero k")
    e2 = np.exp(2j * k * x_match)
    # [f+(k), f-(-k)] and [f+(-k), f-(k)]
    w_pm = e2 * (np.conj(mm) * dmp - mp * np.conj(dmm))
    w_mp = np.conj(e2) * (mm * np.conj(dmp) - np.conj(mp) * dmm)
    kk = k[nz]
    T[nz] = 2j * kk / w[nz]
    Rm[nz] = -T[nz] * w_pm[nz] / (2j * kk)
    Rp[nz] = -T[nz] * w_mp[nz] / (2j * kk)
    data = ScatteringData(k.copy(), T, Rp, Rm)
    if check:
        u = np.nanmax(data.unitarity_defect()[nz], initial=0.0)
        o = np.nanmax(data.offdiagonal_defect()[nz], initial=0.0)
        if u > tol or o > tol:
            raise UnitarityDefect(f"unitarity defect {u:.2e}, off-diagonal defect {o:.2e} exceed {tol:g}")
    return data


def integral_representation_check(p: SampledPotential, jp: JostField, jm: JostField,
                                  s: ScatteringData, k: float) -> tuple[float, float]:
    """Residuals of the integral representations of 1/T and R+-/T at ``k``.

    Returns ``(|1/T - [1 - (2ik)^-1 int 2V m+]|, max_pm |R+-/T - (2ik)^-1 int e^{-+2iky} 2V m-+|)``.
    Integrals run fragment by fragment with Simpson's rule on a node set
    twice as fine as the grid; m is evaluated by Hermite interpolation.
    """
    if k == 0:
        raise ValueError("k must be nonzero")
    spec = p.spec
    sup = spec.support()
    j = int(np.argmin(np.abs(s.k - k)))
    T, Rp, Rm = s.T[j], s.Rp[j], s.Rm[j]
    if sup is None:
        return abs(1 / T - 1.0), max(abs(Rp / T), abs(Rm / T))
    lo, hi = sup
    edges = [lo, *[b for b in p.breakpoints if lo < b < hi], hi]
    jpk, jmk = jp.k_index(k), jm.k_index(k)
    i_t = i_rm = i_rp = 0j
    for a, b in zip(edges, edges[1:]):
        n = 2 * max(2, int(np.ceil((b - a) / p.h))) + 1
        y = np.linspace(a, b, n)
        v = spec.value(y)
        v[0], v[-1] = spec.value(a, side=1), spec.value(b, side=-1)
        mpy = jp.interpolate(y)[0][:, jpk]
        mmy = jm.interpolate(y)[0][:, jmk]
        g = C_V * v
        i_t += simpson(g * mpy, x=y)
        i_rm += simpson(np.exp(2j * k * y) * g * mpy, x=y)
        i_rp += simpson(np.exp(-2j * k * y) * g * mmy, x=y)
    r_t = abs(1 / T - (1 - i_t / (2j * k)))
    r_r = max(abs(Rm / T - i_rm / (2j * k)), abs(Rp / T - i_rp / (2j * k)))
    return float(r_t), float(r_r)


def classify(jp: JostField, jm: JostField, exc_tol: float | None = None,
             x_match: float | None = 0.0):
    """Zero-energy Wronskian, the limit a and the generic/exceptional label.

    ``exc_tol`` defaults to 1e-3 times the scale max(1, max|d f+(x,0)/dx|).
    ``a`` is read off the first stored row, which must lie left of the
    support.  Returns ``(classification, wronskian0, a_limit)``.
    """
    j0p, j0m = jp.k_index(0.0), jm.k_index(0.0)
    i = _match_row(jp, x_match)
    w0 = complex(_w_plus_minus(jp.m[i, j0p], jp.dm_dx[i, j0p], jm.m[i, j0m], jm.dm_dx[i, j0m], 0.0))
    if exc_tol is None:
        exc_tol = 1e-3 * max(1.0, float(np.max(np.abs(jp.dm_dx[:, j0p]))))
    cls = Classification.EXCEPTIONAL if abs(w0) < exc_tol else Classification.GENERIC
    a = jp.m[0, j0p]
    if abs(a.imag) > 1e-8:
        raise NumericalGuardError(f"zero-energy Jost solution is not real: Im a = {a.imag:.2e}")
    return cls, w0, float(a.real)


def zero_energy_limits(s: ScatteringData, a: float | None = None, lim_tol: float | None = None):
    """Extrapolate T and R+ linearly to k = 0 from the two smallest k > 0.

    Needs an exceptional classification.  If ``lim_tol`` is given the result
    is checked against T(0) = 2a/(1+a^2) and R+-(0) = +-(1-a^2)/(1+a^2).
    Returns ``(T0, R0)`` with ``R0 = R+(0)``.
    """
    if s.classification is not None and s.classification != Classification.EXCEPTIONAL:
        raise NotExceptional("zero-energy limits only apply to exceptional potentials")
    pos = np.nonzero(s.k > 0)[0]
    if pos.size < 2:
        raise ValueError("need two positive k samples")
    j1, j2 = pos[np.argsort(s.k[pos])[:2]]
    k1, k2 = s.k[j1], s.k[j2]

    def extrap(y):
        return y[j1] - k1 * (y[j2] - y[j1]) / (k2 - k1)

    T0, R0p, R0m = extrap(s.T), extrap(s.Rp), extrap(s.Rm)
    a = s.a_limit if a is None else a
    if lim_tol is not None and a is not None:
        t_ref = 2 * a / (1 + a * a)
        r_ref = (1 - a * a) / (1 + a * a)
        err = max(abs(T0 - t_ref), abs(R0p - r_ref), abs(R0m + r_ref))
        if err > lim_tol:
            raise NumericalGuardError(f"zero-energy limits off by {err:.3e} (tol {lim_tol:g})")
    return complex(T0), complex(R0p)


def exact_zero_limits(classification: Classification, a: float) -> tuple[float, float, float]:
    """(T(0), R+(0), R-(0)) in closed form.

    Exceptional: T(0) = 2a/(1+a^2), R+-(0) = +-(1-a^2)/(1+a^2).  Generic:
    T(0) = 0 and R+-(0) = -1.
    """
    if classification == Classification.GENERIC:
        return 0.0, -1.0, -1.0
    d = 1.0 + a * a
    return 2 * a / d, (1 - a * a) / d, -(1 - a * a) / d


def scattering_data(jp: JostField, jm: JostField, check: bool = True, tol: float = 1e-6,
                    x_match: float | None = 0.0) -> ScatteringData:
    """Coefficients plus zero-energy data in one record.

    If k = 0 is on the grid the potential is classified; for exceptional
    potentials the k = 0 entries hold the extrapolated limits, for generic
    ones T(0) = 0 and R+-(0) = -1.
    """
    s = compute_coefficients(jp, jm, x_match=x_match, check=check, tol=tol)
    if not np.any(s.k == 0):
        return s
    cls, w0, a = classify(jp, jm, x_match=x_match)
    s = ScatteringData(s.k, s.T, s.Rp, s.Rm, w0, a, cls)
    z = s.k == 0
    T, Rp, Rm = s.T.copy(), s.Rp.copy(), s.Rm.copy()
    if cls == Classification.EXCEPTIONAL:
        T0, R0 = zero_energy_limits(s)
        pos = np.nonzero(s.k > 0)[0]
        j1, j2 = pos[np.argsort(s.k[pos])[:2]]
        k1, k2 = s.k[j1], s.k[j2]
        R0m = s.Rm[j1] - k1 * (s.Rm[j2] - s.Rm[j1]) / (k2 - k1)
        T[z], Rp[z], Rm[z] = T0, R0, R0m
    else:
        T0, R0 = 0j, -1 + 0j
        T[z], Rp[z], Rm[z] = 0, -1, -1
    return ScatteringData(s.k, T, Rp, Rm, w0, a, cls, T0, R0)


def count_bound_states(jp: JostField) -> int:
    """Heuristic count of negative eigenvalues: sign changes of f+(x, 0).

    This is Sturm oscillation applied to the zero-energy solution; it is a
    screening device, not a proof.
    """
    f0 = jp.m[:, jp.k_index(0.0)].real
    s = np.sign(f0[np.abs(f0) > 1e-12])
    return int(np.count_nonzero(s[1:] != s[:-1]))


__all__ = [
    "Classification",
    "ScatteringData",
    "compute_coefficients",
    "integral_representation_check",
    "classify",
    "zero_energy_limits",
    "scattering_data",
    "exact_zero_limits",
    "count_bound_states",
]
