"""Distorted Fourier transform built on the distorted plane waves.

For k >= 0 the wave is Psi(x,k) = T(k) f+(x,k), for k < 0 it is
T(-k) f-(x,-k).  Outside the support [lo, hi] of V both are explicit:

    x >= hi:  Psi = T(|k|) e^{ikx}                 (k >= 0)
              Psi = e^{ikx} + R+(|k|) e^{-ikx}      (k < 0)
    x <= lo:  Psi = e^{ikx} + R-(|k|) e^{-ikx}      (k >= 0)
              Psi = T(|k|) e^{ikx}                 (k < 0)

so only the rows strictly inside the support are stored densely.  The
plane-wave parts reduce to exponential sums on uniform grids, evaluated with
the chirp-z transform.  The transform is applied as a matrix-free operator;
:meth:`DistortedBasis.psi` materialises the full matrix when it is wanted.

    (F phi)(k)   = (2 pi)^{-1/2} sum_x wx conj(Psi(x,k)) phi(x)
    (F^-1 psi)(x) = (2 pi)^{-1/2} sum_k wk Psi(x,k) psi(k)

with trapezoid weights wx, wk.

Where V jumps at a grid node x_j the integrand of F loses smoothness: for
fields in the span of the distorted waves both u'' and Psi'' jump by 2[V]
times the field, and the trapezoid rule picks up the Euler-Maclaurin term
h^4/720 [f'''] with [f'''] = 8[V](conj(Psi') u + conj(Psi) u').  F
subtracts it (``jump_correction``).  Without it, repeated F^-1 F round
trips drift in mass at O(h^4) per step.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AliasWarning, ConfigError, GridMismatch, TruncationViolation
from .jost import JostField, MINUS, PLUS, _defect, compute_jost
from .potential import SampledPotential, make_grid
from .scattering import (
    Classification,
    ScatteringData,
    classify,
    compute_coefficients,
    exact_zero_limits,
)

_SQRT2PI = math.sqrt(2.0 * math.pi)


class Parity(str, enum.Enum):
    ODD = "odd"
    EVEN = "even"
    NONE = "none"


def infer_parity(values: np.ndarray, tol: float = 1e-8) -> Parity:
    """Parity of samples on a grid symmetric about 0, relative to the sup norm."""
    v = np.asarray(values)
    scale = max(float(np.max(np.abs(v), initial=0.0)), 1e-300)
    if np.max(np.abs(v - v[::-1]), initial=0.0) <= tol * scale:
        return Parity.EVEN
    if np.max(np.abs(v + v[::-1]), initial=0.0) <= tol * scale:
        return Parity.ODD
    return Parity.NONE


@dataclass(frozen=True, eq=False)
class PhysicalField:
    x: np.ndarray
    values: np.ndarray
    parity: Parity = Parity.NONE

    @classmethod
    def from_values(cls, x, values, tol: float = 1e-8) -> "PhysicalField":
        values = np.asarray(values, dtype=complex)
        return cls(np.asarray(x), values, infer_parity(values, tol))

    def norm(self) -> float:
        return float(np.sqrt(np.trapezoid(np.abs(self.values) ** 2, self.x)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    k: np.ndarray
    values: np.ndarray
    parity: Parity = Parity.NONE

    @classmethod
    def from_values(cls, k, values, tol: float = 1e-8) -> "SpectralField":
        values = np.asarray(values, dtype=complex)
        return cls(np.asarray(k), values, infer_parity(values, tol))

    def at_zero(self) -> complex:
        return complex(self.values[len(self.k) // 2])

    def norm(self) -> float:
        return float(np.sqrt(np.trapezoid(np.abs(self.values) ** 2, self.k)))


def make_kgrid(k_max: float, n_k: int) -> np.ndarray:
    """Symmetric k-grid with an odd number of points, so k = 0 is sampled."""
    if n_k < 3 or n_k % 2 == 0:
        raise ConfigError("N_k must be odd and at least 3")
    if not k_max > 0:
        raise ConfigError("k_max must be positive")
    return make_grid(k_max, n_k)


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    w = np.full(grid.shape, grid[1] - grid[0])
    w[[0, -1]] *= 0.5
    return w


def _chirp(theta: float, q: np.ndarray) -> np.ndarray:
    """exp(-i theta q^2 / 2) for integer q, with q^2 formed exactly."""
    q2 = q.astype(np.int64) ** 2
    return np.exp(-0.5j * theta * q2.astype(float))


class _Bluestein:
    """out[j] = sum_n a[n] exp(-i theta j n), j < m, by Bluestein's algorithm.

    scipy.signal.CZT forms its chirp as a complex power and loses about
    1e-9 relative accuracy at lengths near 3e4; here the chirp phase is
    built from exact integer squares, which keeps the sums at rounding level.
    """

    def __init__(self, n: int, m: int, theta: float):
        self.n, self.m = n, m
        size = 1 << int(math.ceil(math.log2(n + m - 1)))
        self.size = size
        self.pre = _chirp(theta, np.arange(n))
        self.post = _chirp(theta, np.arange(m))
        q = np.arange(-(n - 1), m)
        kern = np.zeros(size, dtype=complex)
        kern[: m] = np.conj(_chirp(theta, q[n - 1:]))
        kern[size - (n - 1):] = np.conj(_chirp(theta, q[: n - 1]))
        self.kern_hat = np.fft.fft(kern)

    def __call__(self, a: np.ndarray) -> np.ndarray:
        buf = np.zeros(self.size, dtype=complex)
        buf[: self.n] = a * self.pre
        conv = np.fft.ifft(np.fft.fft(buf) * self.kern_hat)
        return self.post * conv[: self.m]


class _ExpSums:
    """Exponential sums between a contiguous run of x points and the k-grid.

    ``to_k(a)[j] = sum_i a_i exp(-i k_j x_i)`` and
    ``to_x(c)[i] = sum_j c_j exp(+i k_j x_i)``.
    """

    def __init__(self, x: np.ndarray, k: np.ndarray):
        self.n, self.m = len(x), len(k)
        if self.n == 0:
            return
        h = x[1] - x[0] if len(x) > 1 else 1.0
        dk = k[1] - k[0]
        x0, k0 = x[0], k[0]
        i, j = np.arange(self.n), np.arange(self.m)
        self._fwd = _Bluestein(self.n, self.m, dk * h)
        self._bwd = _Bluestein(self.m, self.n, -dk * h)
        self._fwd_pre = np.exp(-1j * k0 * h * i)
        self._fwd_post = np.exp(-1j * k0 * x0) * np.exp(-1j * dk * x0 * j)
        self._bwd_pre = np.exp(1j * dk * x0 * j)
        self._bwd_post = np.exp(1j * k0 * x0) * np.exp(1j * k0 * h * i)

    def to_k(self, a: np.ndarray) -> np.ndarray:
        if self.n == 0:
            return np.zeros(self.m, dtype=complex)
        return self._fwd_post * self._fwd(a * self._fwd_pre)

    def to_x(self, c: np.ndarray) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=complex)
        return self._bwd_post * self._bwd(c * self._bwd_pre)


class DistortedBasis:
    """The distorted plane waves of one potential on an (x, k) grid pair.

    Build with :func:`build_basis` (or :func:`free_basis` for V = 0).
    Attributes ``x``, ``k``, ``wx``, ``wk`` are the grids and trapezoid
    weights; ``T``, ``Rp``, ``Rm`` hold T(|k|), R+(|k|), R-(|k|) on the
    full k-grid; ``scattering`` and ``jost`` keep the data the basis was
    built from.
    """

    def __init__(self, potential: SampledPotential | None, x, k, T, Rp, Rm, left: int, right: int,
                 psi_core: np.ndarray, scattering: ScatteringData | None = None,
                 jost: tuple[JostField, JostField] | None = None):
        self.potential = potential
        self.x, self.k = np.asarray(x, float), np.asarray(k, float)
        self.wx, self.wk = trapezoid_weights(self.x), trapezoid_weights(self.k)
        self.T, self.Rp, self.Rm = T, Rp, Rm
        # rows [0, left] lie left of the support, rows [right, N) right of it
        self.left, self.right = left, right
        self.psi_core = psi_core
        self.scattering = scattering
        self.jost = jost
        #: (row, [V], conj Psi(x_j, k), conj Psi'(x_j, k)) per jump of V on a node
        self.jumps: list = []
        self.jump_correction = True
        self._pos = self.k >= 0
        self._Lsum = _ExpSums(self.x[: left + 1], self.k)
        self._Rsum = _ExpSums(self.x[right:], self.k)
        for arr in (self.x, self.k, self.wx, self.wk, self.T, self.Rp, self.Rm, self.psi_core):
            arr.setflags(write=False)

    @property
    def core(self) -> slice:
        return slice(self.left + 1, self.right)

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dk(self) -> float:
        return float(self.k[1] - self.k[0])

    @property
    def L(self) -> float:
        return float(self.x[-1])

    @property
    def k_max(self) -> float:
        return float(self.k[-1])

    @property
    def T0(self) -> complex:
        return complex(self.T[len(self.k) // 2])

    # ---------------------------------------------------------------- transforms

    def F(self, phi: np.ndarray) -> np.ndarray:
        """Forward transform of grid samples (no precondition checks)."""
        a = self.wx * np.asarray(phi)
        pos = self._pos
        sl = self._Lsum.to_k(a[: self.left + 1])
        sr = self._Rsum.to_k(a[self.right:])
        out = np.where(pos, np.conj(self.T) * sr, sr + np.conj(self.Rp) * sr[::-1])
        out = out + np.where(pos, sl + np.conj(self.Rm) * sl[::-1], np.conj(self.T) * sl)
        if self.psi_core.shape[0]:
            out = out + np.conj(self.psi_core).T @ a[self.core]
        if self.jump_correction and self.jumps:
            u, h = np.asarray(phi), self.h
            c = h**4 / 90.0  # 8 / 720
            for i, dv, cpsi, cdpsi in self.jumps:
                # central difference minus its bias h [u'']/4 = h [V] u / 2
                du = (u[i + 1] - u[i - 1]) / (2 * h) - 0.5 * h * dv * u[i]
                out = out - c * dv * (cdpsi * u[i] + cpsi * du)
        return out / _SQRT2PI

    def Finv(self, psi: np.ndarray) -> np.ndarray:
        """Inverse transform of k-samples (no precondition checks)."""
        c = self.wk * np.asarray(psi)
        pos = self._pos
        rev = c[::-1]
        zero = np.zeros_like(c)
        ar = np.where(pos, self.T * c, c) + np.where(self.k > 0, self.Rp * rev, zero)
        al = np.where(pos, c, self.T * c) + np.where(self.k <= 0, self.Rm * rev, zero)
        out = np.empty(len(self.x), dtype=complex)
        out[: self.left + 1] = self._Lsum.to_x(al)
        out[self.right:] = self._Rsum.to_x(ar)
        if self.psi_core.shape[0]:
            out[self.core] = self.psi_core @ c
        return out / _SQRT2PI

    # ---------------------------------------------------------------- matrix views

    def psi(self, cols=None) -> np.ndarray:
        """Psi(x_i, k_j) for all rows and the selected columns (default all)."""
        cols = np.arange(len(self.k)) if cols is None else np.atleast_1d(cols)
        k = self.k[cols]
        T, Rp, Rm = self.T[cols], self.Rp[cols], self.Rm[cols]
        pos = k >= 0
        x = self.x
        out = np.empty((len(x), len(cols)), dtype=complex)
        xl, xr = x[: self.left + 1, None], x[self.right:, None]
        out[: self.left + 1] = np.where(pos, np.exp(1j * k * xl) + Rm * np.exp(-1j * k * xl),
                                        T * np.exp(1j * k * xl))
        out[self.right:] = np.where(pos, T * np.exp(1j * k * xr),
                                    np.exp(1j * k * xr) + Rp * np.exp(-1j * k * xr))
        out[self.core] = self.psi_core[:, cols]
        return out

    def column(self, k: float) -> np.ndarray:
        return self.psi(self.k_index(k))[:, 0]

    def phi(self, cols=None) -> np.ndarray:
        """Phi = exp(-ikx) Psi."""
        cols = np.arange(len(self.k)) if cols is None else np.atleast_1d(cols)
        return np.exp(-1j * np.outer(self.x, self.k[cols])) * self.psi(cols)

    def k_index(self, k: float) -> int:
        j = int(np.argmin(np.abs(self.k - k)))
        if abs(self.k[j] - k) > 1e-9 * max(1.0, abs(k)):
            raise GridMismatch(f"k={k} is not on the k-grid")
        return j

    def dump_psi(self, path) -> None:
        """Write Psi as row-major little-endian (re, im) float64 pairs."""
        np.ascontiguousarray(self.psi(), dtype="<c16").tofile(path)


def _outer_rows(x: np.ndarray, support) -> tuple[int, int]:
    if support is None:
        return len(x) - 1, len(x)
    lo, hi = support
    left = int(np.nonzero(x <= lo)[0][-1])
    right = int(np.nonzero(x >= hi)[0][0])
    return left, right


def free_basis(x, k) -> DistortedBasis:
    """V = 0: Psi(x,k) = exp(ikx), i.e. the classical pair F0, F0^-1."""
    k = np.asarray(k, float)
    one = np.ones(len(k), dtype=complex)
    zero = np.zeros(len(k), dtype=complex)
    x = np.asarray(x, float)
    kp = k[k >= 0]
    ones, zeros = np.ones(len(kp), complex), np.zeros(len(kp), complex)
    sd = ScatteringData(kp, ones, zeros, zeros.copy(), 0j, 1.0, Classification.EXCEPTIONAL, 1 + 0j, 0j)
    return DistortedBasis(None, x, k, one, zero, zero.copy(), len(x) - 1, len(x),
                          np.zeros((0, len(k)), dtype=complex), sd)


def build_basis(p: SampledPotential, k_max: float, n_k: int, *, check: bool = True,
                unitarity_tol: float = 1e-6) -> DistortedBasis:
    """Distorted plane waves of ``p`` on the grid of ``p`` and a symmetric k-grid.

    Jost solutions are computed only on the rows spanning the support.  The
    k = 0 column uses the zero-energy limits in closed form from the
    computed a (exact Jost data at k = 0), so that Psi(x, 0) inherits the
    parity of f+(x, 0).  With ``check`` the unitarity identities are
    enforced at ``unitarity_tol``.
    """
    k = make_kgrid(k_max, n_k)
    x = p.x
    dk = k[1] - k[0]
    # F^-1 is periodic in x with period 2 pi/dk.  Images closer than 4L leave
    # no gap between the box and its copies.  Reflected kernels decay only on
    # the scale of the resonance width, so round trips at the 1e-7 level may
    # need a period of 6-8L.
    if 2.0 * math.pi / dk < 4.0 * x[-1] * (1 - 1e-12):
        warnings.warn(f"k spacing {dk:g} places inverse-transform images within 4L", AliasWarning,
                      stacklevel=2)
    sup = p.spec.support()
    if sup is None:
        b = free_basis(x, k)
        b.potential = p
        return b
    left, right = _outer_rows(x, sup)
    c = (n_k - 1) // 2
    kp = k[c:]
    rows = slice(left, right + 1)
    jp = compute_jost(p, kp, PLUS, rows=rows)
    jm = compute_jost(p, kp, MINUS, rows=rows)
    s = compute_coefficients(jp, jm, x_match=None, check=check, tol=unitarity_tol)
    cls, w0, a = classify(jp, jm, x_match=None)
    T0, Rp0, Rm0 = exact_zero_limits(cls, a)
    Th, Rph, Rmh = s.T.copy(), s.Rp.copy(), s.Rm.copy()
    Th[0], Rph[0], Rmh[0] = T0, Rp0, Rm0
    sd = ScatteringData(kp.copy(), Th, Rph, Rmh, w0, a, cls, complex(T0), complex(Rp0))

    idx = np.abs(np.arange(n_k) - c)
    T, Rp, Rm = Th[idx], Rph[idx], Rmh[idx]
    # core rows: strictly inside the support, rows 1..-2 of the Jost fields
    xc = x[left + 1: right]
    mp, mm = jp.m[1:-1], jm.m[1:-1]
    phi_core = np.empty((len(xc), n_k), dtype=complex)
    phi_core[:, c:] = Th * mp
    phi_core[:, :c] = (Th[idx[:c]] * mm[:, idx[:c]])
    psi_core = np.exp(1j * np.outer(xc, k)) * phi_core
    b = DistortedBasis(p, x, k, T, Rp, Rm, left, right, psi_core, sd, (jp, jm))
    b.jumps = _jump_rows(p, b, jp, jm, idx)
    return b


def _jump_rows(p: SampledPotential, b: DistortedBasis, jp: JostField, jm: JostField, idx) -> list:
    """Psi and Psi' at every grid node where V jumps (for the F correction)."""
    out = []
    h = b.h
    pos = b.k >= 0
    for xb in p.breakpoints:
        i = int(round((xb - b.x[0]) / h))
        if not (0 < i < len(b.x) - 1) or abs(b.x[i] - xb) > 1e-9 * h:
            continue
        xa = np.array([xb])
        dv = float(p.spec.value(xa, +1)[0] - p.spec.value(xa, -1)[0])
        if dv == 0.0:
            continue
        r = i - b.left
        rows = []
        for j in (jp, jm):
            ph = np.exp(1j * j.sign * j.k * b.x[i])
            rows.append((ph * j.m[r], ph * (j.dm_dx[r] + 1j * j.sign * j.k * j.m[r])))
        (fp, dfp), (fm, dfm) = rows
        cpsi = np.conj(b.T * np.where(pos, fp[idx], fm[idx]))
        cdpsi = np.conj(b.T * np.where(pos, dfp[idx], dfm[idx]))
        cpsi.setflags(write=False)
        cdpsi.setflags(write=False)
        out.append((i, dv, cpsi, cdpsi))
    return out


# -------------------------------------------------------------------- operations


def _values(f):
    return f.values if isinstance(f, (PhysicalField, SpectralField)) else np.asarray(f)


def check_decay(values: np.ndarray, tol: float, what: str) -> None:
    v = np.abs(values)
    scale = float(np.max(v, initial=0.0))
    if scale == 0.0:
        return
    edge = max(v[0], v[-1])
    if edge > tol * scale:
        raise TruncationViolation(f"{what} is {edge / scale:.2e} of its maximum at the boundary (tol {tol:g})")


def forward(b: DistortedBasis, phi, decay_tol: float = 1e-8) -> SpectralField:
    """F phi, after checking that phi has decayed below ``decay_tol`` at +-L."""
    v = _values(phi)
    if v.shape != b.x.shape:
        raise GridMismatch("field is not sampled on the basis x-grid")
    check_decay(v, decay_tol, "physical field")
    return SpectralField.from_values(b.k, b.F(v))


def inverse(b: DistortedBasis, psi, decay_tol: float = 1e-6) -> PhysicalField:
    """F^-1 psi, after checking that psi has decayed below ``decay_tol`` at +-k_max."""
    v = _values(psi)
    if v.shape != b.k.shape:
        raise GridMismatch("field is not sampled on the basis k-grid")
    check_decay(v, decay_tol, "spectral field")
    return PhysicalField.from_values(b.x, b.Finv(v))


def classical_pair(x, k) -> tuple:
    """(F0, F0^-1) as callables on samples, using the same quadrature."""
    b = free_basis(x, k)
    return b.F, b.Finv


def eigen_defect(b: DistortedBasis, ks) -> np.ndarray:
    """max over interior x of |(-1/2 D2 + V - k^2/2) Psi(., k)| for each k.

    Stencils straddling a jump of V are excluded, as in the Jost residual.
    """
    cols = np.array([b.k_index(kk) for kk in np.atleast_1d(ks)])
    psi = b.psi(cols)
    p = b.potential
    values = p.values if p is not None else np.zeros(len(b.x))
    bps = p.breakpoints if p is not None else ()
    return _defect(b.x, values, bps, b.k[cols], psi)


def unitarity_defects(b: DistortedBasis, phi) -> tuple[float, float]:
    """(sup |F^-1 F phi - phi|, relative | ||F phi|| - ||phi|| |) on weighted norms."""
    v = _values(phi)
    s = b.F(v)
    back = b.Finv(s)
    n0 = math.sqrt(float(np.sum(b.wx * np.abs(v) ** 2)))
    n1 = math.sqrt(float(np.sum(b.wk * np.abs(s) ** 2)))
    return float(np.max(np.abs(back - v))), abs(n1 - n0) / n0


def symmetry_defect(b: DistortedBasis) -> float:
    """max |Psi(-x,-k) - Psi(x,k)| for k != 0.

    The k = 0 column is left out: for a = -1 the wave is discontinuous in k
    there and the two one-sided limits are mirror images of each other.
    """
    psi = b.psi()
    d = np.abs(psi[::-1, ::-1] - psi)
    d[:, len(b.k) // 2] = 0.0
    return float(np.max(d))


__all__ = [
    "Parity",
    "PhysicalField",
    "SpectralField",
    "DistortedBasis",
    "build_basis",
    "free_basis",
    "make_kgrid",
    "trapezoid_weights",
    "forward",
    "inverse",
    "classical_pair",
    "eigen_defect",
    "unitarity_defects",
    "symmetry_defect",
    "infer_parity",
    "check_decay",
]
