"""Jost solutions f+-(x,k) of -1/2 f'' + V f = k^2/2 f.

The modified solutions m+-(x,k) = exp(-+ikx) f+-(x,k) are stored on the
(x, k) product grid.  Inside the support of V the pair (f, f') is advanced
by a fourth-order Magnus integrator (or classical RK4 on request), with
steps split at the breakpoints of V so that every step sees a smooth
coefficient.  Where V
vanishes the solution is continued exactly as a combination of plane waves.

:func:`volterra_oracle` solves the equivalent Volterra integral equation by
Picard iteration and serves as an independent check of the ODE route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, IntegrationDiverged, NonConvergence
from .potential import SampledPotential

PLUS, MINUS = 1, -1

# kernel-convention constant: -1/2 m'' -+ i k m' + V m = 0 gives 2V in the
# Volterra kernel
C_V = 2.0

# target value of (local wave number) * (RK4 step)
_STEP_PHASE = 0.02
_OVERFLOW = 1e10


def _as_sign(sign) -> int:
    if sign in (1, "+", "plus", "Plus", "PLUS"):
        return PLUS
    if sign in (-1, "-", "minus", "Minus", "MINUS"):
        return MINUS
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")


@dataclass(frozen=True, eq=False)
class JostField:
    """m and dm/dx sampled on ``x`` (rows) times ``k`` (columns)."""

    sign: int
    x: np.ndarray
    k: np.ndarray
    m: np.ndarray
    dm_dx: np.ndarray
    ode_residual: float
    potential: SampledPotential

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def phase(self) -> np.ndarray:
        return np.exp(1j * self.sign * np.outer(self.x, self.k))

    def f(self) -> np.ndarray:
        """The Jost solution itself, exp(+-ikx) m."""
        return self.phase() * self.m

    def df_dx(self) -> np.ndarray:
        return self.phase() * (self.dm_dx + 1j * self.sign * self.k * self.m)

    def k_index(self, k: float) -> int:
        j = int(np.argmin(np.abs(self.k - k)))
        if abs(self.k[j] - k) > 1e-12 * max(1.0, abs(k)):
            raise GridMismatch(f"k={k} is not on the k-grid")
        return j

    def x_index(self, x: float) -> int:
        i = int(np.argmin(np.abs(self.x - x)))
        if abs(self.x[i] - x) > 1e-9 * max(1.0, abs(x)):
            raise GridMismatch(f"x={x} is not a grid point")
        return i

    def boundary_defect(self) -> float:
        """max_k |m - 1| on the stored row where integration starts."""
        row = self.m[-1] if self.sign == PLUS else self.m[0]
        return float(np.max(np.abs(row - 1.0)))

    def interpolate(self, xq) -> tuple[np.ndarray, np.ndarray]:
        """Cubic Hermite interpolation of (m, dm/dx) at arbitrary points."""
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        h = self.h
        i = np.clip(((xq - self.x[0]) // h).astype(int), 0, len(self.x) - 2)
        s = ((xq - self.x[i]) / h)[:, None]
        m0, m1 = self.m[i], self.m[i + 1]
        d0, d1 = self.dm_dx[i] * h, self.dm_dx[i + 1] * h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        m = h00 * m0 + h10 * d0 + h01 * m1 + h11 * d1
        dm = ((6 * s**2 - 6 * s) * m0 + (3 * s**2 - 4 * s + 1) * d0 + (-6 * s**2 + 6 * s) * m1
              + (3 * s**2 - 2 * s) * d1) / h
        return m, dm


def _free_propagate(f0, df0, k, dx):
    """Exact plane-wave continuation of (f, f') over a displacement dx (V = 0)."""
    kd = np.multiply.outer(dx, k)
    c = np.cos(kd)
    s_over_k = dx[:, None] * np.sinc(kd / np.pi)
    f = f0 * c + df0 * s_over_k
    df = -k * np.sin(kd) * f0 + df0 * c
    return f, df


def _rk4_sweep(spec, nodes, k, f, df, substeps, direction):
    """Integrate f'' = (2V - k^2) f across consecutive ``nodes``.

    ``nodes`` are ordered in the direction of integration; breakpoints of V
    are among them, so each interval carries a smooth V.  Returns (f, f') at
    every node.
    """
    k2 = k * k
    fs = np.empty((len(nodes), k.size), dtype=complex)
    dfs = np.empty_like(fs)
    fs[0], dfs[0] = f, df
    side_start, side_end = (-1, 1) if direction < 0 else (1, -1)
    for n in range(len(nodes) - 1):
        a, b = nodes[n], nodes[n + 1]
        if a == b:
            fs[n + 1], dfs[n + 1] = f, df
            continue
        pts = np.linspace(a, b, 2 * substeps + 1)
        v = spec.value(pts)
        v[0] = spec.value(a, side=side_start)
        v[-1] = spec.value(b, side=side_end)
        c = 2.0 * v
        hs = (b - a) / substeps
        for j in range(substeps):
            c0, c1, c2 = c[2 * j] - k2, c[2 * j + 1] - k2, c[2 * j + 2] - k2
            k1f, k1d = df, c0 * f
            f2 = f + 0.5 * hs * k1f
            d2 = df + 0.5 * hs * k1d
            k2f, k2d = d2, c1 * f2
            f3 = f + 0.5 * hs * k2f
            d3 = df + 0.5 * hs * k2d
            k3f, k3d = d3, c1 * f3
            f4 = f + hs * k3f
            d4 = df + hs * k3d
            k4f, k4d = d4, c2 * f4
            f = f + hs / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f)
            df = df + hs / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
        fs[n + 1], dfs[n + 1] = f, df
    return fs, dfs


_GAUSS = math.sqrt(3.0) / 6.0


def _magnus_sweep(spec, nodes, k, f, df, substeps):
    """Fourth-order Magnus integration of (f, f')' = [[0, 1], [2V - k^2, 0]] (f, f').

    The two-point Gauss rule samples V strictly inside each step, so steps
    ending on a jump see one smooth piece.  For piecewise constant V the
    propagator is exact; otherwise the error is O(step^4) with constants
    that do not grow with k.
    """
    k2 = k * k
    fs = np.empty((len(nodes), k.size), dtype=complex)
    dfs = np.empty_like(fs)
    fs[0], dfs[0] = f, df
    for n in range(len(nodes) - 1):
        a, b = nodes[n], nodes[n + 1]
        if a == b:
            fs[n + 1], dfs[n + 1] = f, df
            continue
        hs = (b - a) / substeps
        t0 = a + hs * np.arange(substeps)
        v1 = 2.0 * spec.value(t0 + (0.5 - _GAUSS) * hs)
        v2 = 2.0 * spec.value(t0 + (0.5 + _GAUSS) * hs)
        for j in range(substeps):
            q = 0.5 * (v1[j] + v2[j]) - k2
            # commutator term of the Magnus expansion
            d = math.sqrt(3.0) / 12.0 * hs * hs * (v1[j] - v2[j])
            s2 = d * d + hs * hs * q
            r = np.sqrt(np.abs(s2))
            grow = s2 > 0
            c = np.where(grow, np.cosh(np.where(grow, r, 0.0)), np.cos(r))
            with np.errstate(invalid="ignore", divide="ignore"):
                sh = np.where(r < 1e-8, 1.0 + s2 / 6.0,
                              np.where(grow, np.sinh(np.where(grow, r, 0.0)) / r, np.sin(r) / r))
            f, df = c * f + sh * (d * f + hs * df), c * df + sh * (hs * q * f - d * df)
        fs[n + 1], dfs[n + 1] = f, df
    return fs, dfs


def _defect(x, values, breakpoints, k, f) -> np.ndarray:
    h = x[1] - x[0]
    interior = np.ones(len(x), dtype=bool)
    interior[[0, -1]] = False
    for b in breakpoints:
        interior &= ~((x - h <= b) & (x + h >= b))
    idx = np.nonzero(interior)[0]
    if idx.size == 0:
        return np.zeros(len(k))
    lap = (f[idx + 1] - 2 * f[idx] + f[idx - 1]) / (h * h)
    res = -0.5 * lap + (values[idx, None] - 0.5 * k * k) * f[idx]
    return np.max(np.abs(res), axis=0)


def ode_defect(p: SampledPotential, k: np.ndarray, f: np.ndarray, rows: slice = slice(None)) -> np.ndarray:
    """|-1/2 D2 f + (V - k^2/2) f| on stencils that stay inside one fragment.

    ``f`` has shape (len(p.x[rows]), N_k).  Returns the per-k maximum.
    Stencils that straddle a jump of V are skipped: there the second
    difference does not approximate f''.
    """
    return _defect(p.x[rows], p.values[rows], p.breakpoints, k, f)


def compute_jost(p: SampledPotential, kgrid, sign=PLUS, substeps: int | None = None,
                 method: str = "magnus", rows: slice | None = None) -> JostField:
    """Jost solutions for every k in ``kgrid`` on the grid of ``p``.

    ``method`` is ``"magnus"`` (default, one fourth-order Magnus step per
    grid cell unless ``substeps`` says otherwise) or ``"rk4"`` (classical
    Runge-Kutta, by default sub-stepped so that (local wave number) x (step)
    stays below 0.02).  ``rows`` restricts the stored x-range to a
    contiguous slice of the grid, which keeps memory at O(rows x N_k) when
    only the neighbourhood of the support is needed.
    """
    sign = _as_sign(sign)
    k = np.atleast_1d(np.asarray(kgrid, dtype=float))
    if k.ndim != 1 or not np.all(np.isfinite(k)):
        raise GridMismatch("k-grid must be a finite 1-D array")
    if method not in ("magnus", "rk4"):
        raise ValueError(f"unknown method {method!r}")
    rows = slice(None) if rows is None else rows
    x_all, h = p.x, p.h
    x = x_all[rows]
    if x.size < 3:
        raise GridMismatch("need at least three rows")
    spec = p.spec
    sup = spec.support()
    nx, nk = len(x), k.size
    m = np.ones((nx, nk), dtype=complex)
    dm = np.zeros((nx, nk), dtype=complex)

    if sup is not None:
        lo, hi = sup
        if lo < x_all[0] + 2 * h or hi > x_all[-1] - 2 * h:
            raise GridMismatch("grid must cover the support of V with two spare cells")
        if substeps is None:
            if method == "rk4":
                kappa = math.sqrt(float(np.max(k * k, initial=0.0)) + 2.0 * spec.max_abs())
                substeps = max(1, math.ceil(kappa * h / _STEP_PHASE))
            else:
                substeps = 1
        inside = np.nonzero((x > lo) & (x < hi))[0]
        bps = [b for b in p.breakpoints if lo < b < hi]
        grid_inside = x_all[(x_all > lo) & (x_all < hi)]
        asc = np.unique(np.concatenate([[lo, hi], grid_inside, bps]))
        nodes = asc[::-1] if sign == PLUS else asc
        f0 = np.exp(1j * sign * k * nodes[0])
        df0 = 1j * sign * k * f0
        if method == "rk4":
            fs, dfs = _rk4_sweep(spec, nodes, k, f0, df0, substeps, -sign)
        else:
            fs, dfs = _magnus_sweep(spec, nodes, k, f0, df0, substeps)
        end_f, end_df, end = fs[-1], dfs[-1], nodes[-1]
        if sign == PLUS:
            fs, dfs = fs[::-1], dfs[::-1]
        if inside.size:
            pos = np.searchsorted(asc, x[inside])
            e = np.exp(-1j * sign * np.outer(x[inside], k))
            m[inside] = e * fs[pos]
            dm[inside] = e * (dfs[pos] - 1j * sign * k * fs[pos])

        # plane-wave continuation on the far side of the support
        far = np.nonzero(x <= lo)[0] if sign == PLUS else np.nonzero(x >= hi)[0]
        if far.size:
            ff, dff = _free_propagate(end_f, end_df, k, x[far] - end)
            e = np.exp(-1j * sign * np.outer(x[far], k))
            m[far] = e * ff
            dm[far] = e * (dff - 1j * sign * k * ff)

        if not np.all(np.isfinite(m)) or np.max(np.abs(m)) > _OVERFLOW:
            raise IntegrationDiverged("Jost solution left the overflow guard")

    f = np.exp(1j * sign * np.outer(x, k)) * m
    residual = float(np.max(ode_defect(p, k, f, rows), initial=0.0))
    return JostField(sign, x, k, m, dm, residual, p)


# --------------------------------------------------------------------------
# Volterra oracle
# --------------------------------------------------------------------------


def _cumtrapz_from_right(y, x):
    """int_{x_i}^{x_end} y dx for every node."""
    seg = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
    out = np.zeros_like(y)
    out[:-1] = np.cumsum(seg[::-1])[::-1]
    return out


def _cumtrapz_from_left(y, x):
    seg = 0.5 * (y[1:] + y[:-1]) * np.diff(x)
    out = np.zeros_like(y)
    out[1:] = np.cumsum(seg)
    return out


class VolterraSolution:
    """Picard iterate of the Volterra equation, callable on arbitrary x.

    Values at the quadrature nodes are exact for the discretised equation;
    elsewhere the cumulative integrals are interpolated linearly.
    """

    def __init__(self, sign, k, nodes, m_nodes, cum, support, differences):
        self.sign, self.k = sign, k
        self.nodes, self.m_nodes = nodes, m_nodes
        self._cum = cum
        self.support = support
        self.differences = differences

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.atleast_1d(x)
        k, sign = self.k, self.sign
        if self.support is None:
            out = np.ones(xs.shape, dtype=complex)
            return out if x.ndim else out[0]
        lo, hi = self.support
        xc = np.clip(xs, lo, hi)
        c0 = np.interp(xc, self.nodes, self._cum[0].real) + 1j * np.interp(xc, self.nodes, self._cum[0].imag)
        c1 = np.interp(xc, self.nodes, self._cum[1].real) + 1j * np.interp(xc, self.nodes, self._cum[1].imag)
        if k == 0.0:
            # m = 1 + sign * (c1 - x c0) with c1 = int y g, c0 = int g
            out = 1.0 + sign * (c1 - xs * c0)
        else:
            out = 1.0 + (np.exp(-2j * sign * k * xs) * c1 - c0) / (2j * k)
        # beyond the start of the integration the equation gives m = 1
        if sign == 1:
            out = np.where(xs >= hi, 1.0, out)
        else:
            out = np.where(xs <= lo, 1.0, out)
        return out if x.ndim else out[0]


def volterra_oracle(p: SampledPotential, k: float, sign=PLUS, iterations: int = 20,
                    refine: int = 64) -> VolterraSolution:
    """Picard iteration for m+(x,k) = 1 + int_x^inf K(y-x,k) 2V(y) m+(y,k) dy.

    ``K(x,k) = (exp(2ikx) - 1)/(2ik)`` (``K(x,0) = x``); the minus solution
    uses the mirrored equation.  The kernel is separable, so each iteration
    costs two cumulative trapezoid sums on a node set ``refine`` times finer
    than the grid, with breakpoints doubled so jumps of V are resolved.

    Raises :class:`NonConvergence` if the last Picard correction is larger
    than the one before it.
    """
    sign = _as_sign(sign)
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    k = float(k)
    spec = p.spec
    sup = spec.support()
    if sup is None:
        return VolterraSolution(sign, k, np.array([0.0]), np.ones(1, complex), None, None, [0.0])
    lo, hi = sup
    edges = [lo, *[b for b in p.breakpoints if lo < b < hi], hi]
    h_fine = p.h / refine
    xs, vs = [], []
    for a, b in zip(edges, edges[1:]):
        n = max(2, math.ceil((b - a) / h_fine) + 1)
        seg = np.unique(np.concatenate([np.linspace(a, b, n), p.x[(p.x > a) & (p.x < b)]]))
        v = spec.value(seg)
        v[0] = spec.value(a, side=1)
        v[-1] = spec.value(b, side=-1)
        xs.append(seg)
        vs.append(v)
    y = np.concatenate(xs)  # breakpoints appear twice, once per side
    g_v = C_V * np.concatenate(vs)

    if sign == PLUS:
        cum = _cumtrapz_from_right
    else:
        cum = _cumtrapz_from_left

    def apply(mv):
        g = g_v * mv
        if k == 0.0:
            c0 = cum(g, y)
            c1 = cum(y * g, y)
            return 1.0 + sign * (c1 - y * c0), (c0, c1)
        c0 = cum(g, y)
        c1 = cum(np.exp(2j * sign * k * y) * g, y)
        return 1.0 + (np.exp(-2j * sign * k * y) * c1 - c0) / (2j * k), (c0, c1)

    mv = np.ones(y.shape, dtype=complex)
    diffs = []
    for _ in range(iterations):
        new, pair = apply(mv)
        diffs.append(float(np.max(np.abs(new - mv))))
        mv = new
    if len(diffs) >= 2 and diffs[-1] > diffs[-2] and diffs[-1] > 1e-13:
        raise NonConvergence(f"Picard corrections not contracting: {diffs[-2]:.3e} -> {diffs[-1]:.3e}")
    # cumulative sums for the final iterate, used when evaluating off-node
    _, pair = apply(mv)
    return VolterraSolution(sign, k, y, mv, pair, sup, diffs)


def wronskian(fp: JostField, fm: JostField, k: float, x_match: float = 0.0) -> complex:
    """[f+, f-] = f- f+' - f+ f-' at ``x_match`` (a grid point).

    In terms of the modified solutions the exponentials cancel:
    ``m- m+' - m+ m-' + 2ik m+ m-``.
    """
    jp, jm = fp.k_index(k), fm.k_index(k)
    i = fp.x_index(x_match)
    mp, dmp = fp.m[i, jp], fp.dm_dx[i, jp]
    mm, dmm = fm.m[i, jm], fm.dm_dx[i, jm]
    return complex(mm * dmp - mp * dmm + 2j * k * mp * mm)


__all__ = [
    "PLUS",
    "MINUS",
    "C_V",
    "JostField",
    "compute_jost",
    "volterra_oracle",
    "VolterraSolution",
    "wronskian",
    "ode_defect",
]
