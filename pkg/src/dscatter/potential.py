"""Potentials: construction, grid sampling and admissibility checks.

Every potential is piecewise smooth with a finite list of breakpoints and a
compact (declared) support.  Outside the support the potential is treated as
exactly zero, which is what lets the Jost solver continue solutions
analytically as plane waves.

At a jump the sampled value is the average of the two one-sided limits, so a
symmetric potential samples symmetrically on any symmetric grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainTooSmall

# Gaussian tails are cut where exp(-x^2 / 2 w^2) drops below this level.
GAUSSIAN_CUTOFF = 1e-17


def japanese(x):
    """<x> = (1 + x^2)^(1/2)."""
    return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)


def solve_well_depth(b: float = math.pi / 4, tol: float = 1e-12) -> float:
    """Depth A of the barrier that makes the square-well pair exceptional.

    Solves ``A tanh A = b tan b`` (which is ``pi/4`` for the default
    ``b = pi/4``) by bisection on ``[0.5, 2]`` followed by one Newton step.
    """
    target = b * math.tan(b)
    g = lambda a: a * math.tanh(a) - target
    lo, hi = 0.5, 2.0
    if g(lo) > 0 or g(hi) < 0:
        # the bracket only covers targets in (0.23, 1.93); widen it
        lo, hi = 1e-8, max(2.0, 2.0 * target + 2.0)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    a = 0.5 * (lo + hi)
    a -= g(a) / (math.tanh(a) + a / math.cosh(a) ** 2)
    return a


# --------------------------------------------------------------------------
# potential specifications
# --------------------------------------------------------------------------


def _segment_callable(desc) -> Callable[[np.ndarray], np.ndarray]:
    """Turn a segment value descriptor into a vectorised function.

    A descriptor is a number (constant piece) or ``{"poly": [c0, c1, ...]}``
    with coefficients in ascending powers of x.
    """
    if isinstance(desc, (int, float)):
        c = float(desc)
        return lambda x: np.full(np.shape(x), c)
    if isinstance(desc, dict) and "poly" in desc:
        coeffs = [float(c) for c in desc["poly"]]
        return lambda x: np.polynomial.polynomial.polyval(np.asarray(x, float), coeffs)
    raise ConfigError(f"unsupported segment value descriptor: {desc!r}")


class PotentialSpec:
    """Symbolic description of a real potential V(x)."""

    kind = "abstract"

    #: sorted fragmentation points (jumps or kinks)
    breakpoints: tuple = ()

    def support(self) -> tuple[float, float] | None:
        """Closed interval outside of which V vanishes, or None for V = 0."""
        raise NotImplementedError

    def value(self, x, side: int = 0) -> np.ndarray:
        """Evaluate V at ``x``.

        ``side=-1``/``+1`` select the left/right limit at a breakpoint;
        ``side=0`` averages the two.
        """
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)

    def max_abs(self) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(PotentialSpec):
    kind = "zero"

    def support(self):
        return None

    def value(self, x, side=0):
        return np.zeros(np.shape(x))

    def max_abs(self):
        return 0.0

    def to_dict(self):
        return {"kind": "zero"}


@dataclass(frozen=True)
class Piecewise(PotentialSpec):
    """Sum of pieces, each supported on an open interval (x_lo, x_hi).

    ``segments`` is a sequence of ``(x_lo, x_hi, descriptor)``; see
    :func:`_segment_callable` for descriptors.
    """

    segments: tuple = ()
    kind = "piecewise"

    def __post_init__(self):
        segs = tuple((float(a), float(b), d) for a, b, d in self.segments)
        for a, b, _ in segs:
            if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
                raise ConfigError(f"bad segment ({a}, {b})")
        segs = tuple(sorted(segs, key=lambda s: s[0]))
        for (a0, b0, _), (a1, b1, _) in zip(segs, segs[1:]):
            if a1 < b0:
                raise ConfigError("segments overlap")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_funcs", tuple(_segment_callable(d) for *_, d in segs))
        pts = sorted({p for a, b, _ in segs for p in (a, b)})
        object.__setattr__(self, "breakpoints", tuple(pts))

    def support(self):
        if not self.segments:
            return None
        return (self.segments[0][0], self.segments[-1][1])

    def value(self, x, side=0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for (a, b, _), fn in zip(self.segments, self._funcs):
            inside = (x > a) & (x < b)
            if inside.any():
                out[inside] += fn(x[inside])
            # one-sided contributions at the end points of the segment
            w_lo = {0: 0.5, 1: 1.0, -1: 0.0}[side]
            w_hi = {0: 0.5, 1: 0.0, -1: 1.0}[side]
            at_a = x == a
            if at_a.any() and w_lo:
                out[at_a] += w_lo * fn(x[at_a])
            at_b = x == b
            if at_b.any() and w_hi:
                out[at_b] += w_hi * fn(x[at_b])
        return out

    def max_abs(self):
        m = 0.0
        for (a, b, _), fn in zip(self.segments, self._funcs):
            xs = np.linspace(a, b, 257)
            m = max(m, float(np.max(np.abs(fn(xs)))))
        return m

    def to_dict(self):
        return {"kind": "piecewise", "segments": [[a, b, d] for a, b, d in self.segments]}


class SquareWellPair(Piecewise):
    """Barrier of height s*A^2 on 0<|x|<1 flanked by wells of depth s*B^2 on 1<|x|<2.

    With ``A tanh A = B tan B`` the pair is exceptional for the operator
    ``-d^2/dx^2 + V/s``.  The default ``depth_scale=0.5`` matches the
    Hamiltonian ``-1/2 d^2/dx^2 + V`` used throughout the package; with
    ``depth_scale=1`` the depths are taken literally and the pair is generic.
    """

    kind = "square_well_pair"

    def __init__(self, A: float | None = None, B: float = math.pi / 4, depth_scale: float = 0.5):
        if A is None:
            A = solve_well_depth(B)
        for v in (A, B, depth_scale):
            if not math.isfinite(v):
                raise ConfigError("square well parameters must be finite")
        object.__setattr__(self, "A", float(A))
        object.__setattr__(self, "B", float(B))
        object.__setattr__(self, "depth_scale", float(depth_scale))
        top, bottom = depth_scale * A * A, -depth_scale * B * B
        super().__init__(
            segments=((-2.0, -1.0, bottom), (-1.0, 0.0, top), (0.0, 1.0, top), (1.0, 2.0, bottom))
        )

    def __repr__(self):
        return f"SquareWellPair(A={self.A!r}, B={self.B!r}, depth_scale={self.depth_scale!r})"

    def __eq__(self, other):
        return isinstance(other, SquareWellPair) and (self.A, self.B, self.depth_scale) == (
            other.A,
            other.B,
            other.depth_scale,
        )

    def __hash__(self):
        return hash((self.kind, self.A, self.B, self.depth_scale))

    def to_dict(self):
        return {"kind": "square_well_pair", "A": self.A, "B": self.B, "depth_scale": self.depth_scale}


@dataclass(frozen=True)
class Gaussian(PotentialSpec):
    """``amp * exp(-x^2 / (2 width^2))``, cut to zero where negligible."""

    amp: float = 1.0
    width: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if not (math.isfinite(self.amp) and math.isfinite(self.width)) or self.width <= 0:
            raise ConfigError("gaussian needs finite amp and width > 0")

    @property
    def cutoff(self) -> float:
        return self.width * math.sqrt(-2.0 * math.log(GAUSSIAN_CUTOFF))

    def support(self):
        if self.amp == 0:
            return None
        return (-self.cutoff, self.cutoff)

    def value(self, x, side=0):
        x = np.asarray(x, dtype=float)
        v = self.amp * np.exp(-0.5 * (x / self.width) ** 2)
        return np.where(np.abs(x) <= self.cutoff, v, 0.0)

    def max_abs(self):
        return abs(self.amp)

    def to_dict(self):
        return {"kind": "gaussian", "amp": self.amp, "width": self.width}


def potential_from_dict(d: dict) -> PotentialSpec:
    """Build a spec from its JSON/TOML object form."""
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("potential must be an object with a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "zero":
            return Zero()
        if kind == "square_well_pair":
            B = float(d.get("B", math.pi / 4))
            A = d.get("A", "auto")
            A = solve_well_depth(B) if A == "auto" else float(A)
            return SquareWellPair(A, B, float(d.get("depth_scale", 0.5)))
        if kind == "gaussian":
            return Gaussian(float(d["amp"]), float(d["width"]))
        if kind == "piecewise":
            segs = []
            for s in d["segments"]:
                if isinstance(s, dict):
                    segs.append((s["x_lo"], s["x_hi"], s["value"]))
                else:
                    a, b, v = s
                    segs.append((a, b, v))
            return Piecewise(tuple(segs))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid {kind} potential: {exc}") from exc
    raise ConfigError(f"unknown potential kind {kind!r}")


def load_potential(path: str | Path) -> PotentialSpec:
    """Read a potential spec from a .json or .toml file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        if path.suffix == ".toml":
            import tomli

            data = tomli.loads(text)
            data = data.get("potential", data)
        else:
            data = json.loads(text)
    except Exception as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return potential_from_dict(data)


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------


def make_grid(L: float, N: int) -> np.ndarray:
    """Uniform grid of N points on [-L, L] (both ends included).

    Points are generated as integer multiples of h about the centre so that
    x[i] == -x[N-1-i] exactly and refining N -> 2N-1 nests the grids.
    """
    h = 2.0 * L / (N - 1)
    return (np.arange(N) - 0.5 * (N - 1)) * h


@dataclass(frozen=True, eq=False)
class SampledPotential:
    spec: PotentialSpec
    L: float
    x: np.ndarray
    values: np.ndarray
    breakpoints: tuple
    symmetric: bool
    weighted_norms: dict = field(default_factory=dict)

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def N(self) -> int:
        return len(self.x)

    def support(self):
        return self.spec.support()

    def mirror_defect(self) -> float:
        return float(np.max(np.abs(self.values - self.values[::-1])))


def sample(spec: PotentialSpec, L: float, N: int) -> SampledPotential:
    """Sample ``spec`` on :func:`make_grid(L, N)`.

    Raises :class:`DomainTooSmall` unless the support lies strictly inside
    ``(-L, L)``.
    """
    if not (L > 0) or N < 16:
        raise ConfigError("need L > 0 and N >= 16")
    sup = spec.support()
    if sup is not None and (sup[0] <= -L or sup[1] >= L):
        raise DomainTooSmall(f"support {sup} does not fit inside (-{L}, {L})")
    x = make_grid(L, N)
    values = spec.value(x)
    if not np.all(np.isfinite(values)):
        raise ConfigError("potential is not finite on the grid")
    symmetric = bool(np.max(np.abs(values - values[::-1]), initial=0.0) <= 1e-12)
    bps = tuple(b for b in spec.breakpoints if -L < b < L)
    norms = {s: float(np.trapezoid(japanese(x) ** s * np.abs(values), x)) for s in (1, 3)}
    return SampledPotential(spec, float(L), x, values, bps, symmetric, norms)


@dataclass(frozen=True)
class ConditionReport:
    l13_finite: bool
    symmetric: bool
    fragmentation_ok: bool

    def all_ok(self) -> bool:
        return self.l13_finite and self.symmetric and self.fragmentation_ok


def fragments(p: SampledPotential) -> list[np.ndarray]:
    """Index arrays of the grid points lying strictly inside each fragment."""
    edges = [-np.inf, *p.breakpoints, np.inf]
    out = []
    for a, b in zip(edges, edges[1:]):
        idx = np.nonzero((p.x > a) & (p.x < b))[0]
        if idx.size:
            out.append(idx)
    return out


def check_condition_1(p: SampledPotential) -> ConditionReport:
    """Norm, symmetry and fragmentation checks on a sampled potential.

    The absence of negative eigenvalues is screened separately by
    :func:`dscatter.scattering.count_bound_states`.
    """
    l13 = bool(np.isfinite(p.weighted_norms.get(3, np.inf)))
    ok = True
    for idx in fragments(p):
        xs = p.x[idx]
        g = japanese(xs) ** 2 * p.values[idx]
        total = np.trapezoid(np.abs(g), xs) if len(xs) > 1 else 0.0
        if len(xs) > 1:
            total += np.sum(np.abs(np.diff(g)))  # integral of |g'| by differences
        ok &= bool(np.isfinite(total))
    return ConditionReport(l13, p.symmetric, ok)


def builtin(name: str) -> PotentialSpec:
    """Named potentials used in the tests, demos and self-test."""
    table = {
        "zero": Zero,
        "square_well_pair": lambda: SquareWellPair(),
        "gaussian": lambda: Gaussian(1.0, 1.0),
        # symmetric well with an odd zero-energy resonance (a = -1); it has a
        # bound state, so it only serves the linear T(0) = -1 diagnostics
        "odd_resonance_well": lambda: Piecewise(((-1.0, 1.0, -(math.pi**2) / 8),)),
    }
    try:
        return table[name]()
    except KeyError:
        raise ConfigError(f"unknown builtin potential {name!r}") from None


__all__ = [
    "PotentialSpec",
    "Zero",
    "Piecewise",
    "SquareWellPair",
    "Gaussian",
    "SampledPotential",
    "ConditionReport",
    "solve_well_depth",
    "sample",
    "make_grid",
    "check_condition_1",
    "fragments",
    "potential_from_dict",
    "load_potential",
    "builtin",
    "japanese",
]

