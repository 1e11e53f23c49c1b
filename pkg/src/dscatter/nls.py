"""Cubic NLS  i u_t = -u_xx/2 + V u + lambda |u|^2 u  in the distorted representation.

The primary solver is Strang splitting with the linear flow taken exactly
in the distorted spectral variable.  The state is carried as the profile

    w(t) = F U(-t) u(t) = exp(i t k^2/2) F u(t),

so the linear step costs nothing and each nonlinear kick is one inverse
and one forward transform:

    u = F^-1 exp(-i t k^2/2) w,   u <- u exp(-i lambda |u|^2 tau),
    w = exp(i t k^2/2) F u.

Consecutive half kicks at the same time are merged, so a Strang step
t_n -> t_{n+1} amounts to kicks of weight (dt_{n-1} + dt_n)/2 at every t_n.
For lambda = 0 no transform is applied and the result coincides with the
linear evolution.

The cross-check :func:`evolve_w_frame` integrates

    i dw/dt = lambda t^-1 V(t)^-1 (|V(t) w|^2 V(t) w)

by RK4 in tau = log t.

Discrete norms (all trapezoid sums, derivatives by FFT on the sampled grid):

    mass        ||u||_2     = (sum wx |u|^2)^{1/2}
    H^1         ||u||_{H^1} = (sum wx (|u|^2 + |D u|^2))^{1/2}
    H^{0,1}     ||<x> u||_2 = (sum wx (1 + x^2) |u|^2)^{1/2}
    h1_w        the H^1 norm of w over the k-grid with weights wk
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    BlowupGuard,
    ConfigError,
    GridMismatch,
    MassDrift,
    NotConverged,
    StepRejected,
)
from .factorization import (
    FactorizationOps,
    apply_V,
    apply_V_inv,
    warn_if_escaping,
)
from .scattering import ScatteringData
from .transform import DistortedBasis, Parity, PhysicalField, SpectralField, infer_parity

LADDER = math.sqrt(10.0)


# ------------------------------------------------------------------ norms


def fft_derivative(values: np.ndarray, spacing: float) -> np.ndarray:
    """Spectral derivative of samples on a uniform grid."""
    n = len(values)
    freq = 2 * np.pi * np.fft.fftfreq(n, d=spacing)
    return np.fft.ifft(1j * freq * np.fft.fft(values))


def l2_norm(values: np.ndarray, weights: np.ndarray) -> float:
    return math.sqrt(float(np.sum(weights * np.abs(values) ** 2)))


def h1_norm(values: np.ndarray, grid: np.ndarray, weights: np.ndarray) -> float:
    d = fft_derivative(values, grid[1] - grid[0])
    return math.sqrt(float(np.sum(weights * (np.abs(values) ** 2 + np.abs(d) ** 2))))


def weighted_norm(values: np.ndarray, grid: np.ndarray, weights: np.ndarray) -> float:
    """||<x> u||_2."""
    return math.sqrt(float(np.sum(weights * (1 + grid**2) * np.abs(values) ** 2)))


def data_size(b: DistortedBasis, u0: np.ndarray) -> float:
    """||u0||_{H^1} + ||u0||_{H^{0,1}}, the smallness measure of the data."""
    return h1_norm(u0, b.x, b.wx) + weighted_norm(u0, b.x, b.wx)


def _normalize(b: DistortedBasis, g: np.ndarray, epsilon: float) -> np.ndarray:
    return epsilon * g / data_size(b, g)


def odd_data(b: DistortedBasis, epsilon: float, distorted: bool = True) -> np.ndarray:
    """Odd data of size ||u0||_{H^1} + ||u0||_{H^{0,1}} = epsilon.

    By default the distorted packet c F^-1[-i k exp(-k^2/4)], which is
    c' x exp(-x^2) when V = 0.  Unlike x exp(-x^2) itself, whose distorted
    transform has an algebraic tail when V jumps, it is localized in k.
    ``distorted=False`` gives the plain c x exp(-x^2).
    """
    if distorted:
        return _normalize(b, b.Finv(-1j * b.k * np.exp(-0.25 * b.k**2)), epsilon)
    return _normalize(b, (b.x * np.exp(-b.x**2)).astype(complex), epsilon)


def even_data(b: DistortedBasis, epsilon: float, distorted: bool = True) -> np.ndarray:
    """Even counterpart of :func:`odd_data`: c F^-1[exp(-k^2/4)] or c exp(-x^2)."""
    if distorted:
        return _normalize(b, b.Finv(np.exp(-0.25 * b.k**2).astype(complex)), epsilon)
    return _normalize(b, np.exp(-b.x**2).astype(complex), epsilon)


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class NlsConfig:
    """Parameters of an NLS run.

    ``dt`` is a fixed step or ``"adaptive"``: dt = clip(dt_rel * t, dt_min,
    dt_max), with steps shortened to land on record times.  After every
    nonlinear kick the profile is zeroed for |k| > filter_frac * k_max (the
    2/3 rule by default; ``None`` disables it).
    """

    lam: float = 1.0
    epsilon: float = 0.05
    dt: float | str = "adaptive"
    t_max: float = 100.0
    beta: float = 0.1
    parity: Parity = Parity.ODD
    dt_rel: float = 0.02
    dt_min: float = 0.01
    dt_max: float = 2.0
    mass_tol: float = 1e-5
    filter_frac: float | None = 2.0 / 3.0
    records_per_decade: int = 10
    check_parity: bool = True

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if not self.t_max > 0:
            raise ConfigError("t_max must be positive")
        if not 0 < self.beta <= 0.125:
            raise ConfigError("beta must lie in (0, 1/8]")
        if isinstance(self.dt, str):
            if self.dt != "adaptive":
                raise ConfigError(f"unknown dt policy {self.dt!r}")
        elif not self.dt > 0:
            raise ConfigError("dt must be positive")
        object.__setattr__(self, "parity", Parity(self.parity))

    def step(self, t: float) -> float:
        if self.dt == "adaptive":
            return min(self.dt_max, max(self.dt_min, self.dt_rel * t))
        return float(self.dt)


def parity_for(T0: complex) -> Parity:
    """Parity paired with T(0): odd for T(0) = 1, even for T(0) = -1."""
    if abs(T0 - 1) < 1e-6:
        return Parity.ODD
    if abs(T0 + 1) < 1e-6:
        return Parity.EVEN
    return Parity.NONE


def snapshot_times(t_max: float, t0: float = 1.0) -> list[float]:
    """t0 and the ratio-sqrt(10) ladder above it, up to t_max."""
    out, j = [], 0
    while True:
        t = t0 * LADDER**j
        if t > t_max * (1 + 1e-12):
            break
        out.append(float(t))
        j += 1
    return out


def record_times(t_max: float, per_decade: int, t_start: float = 0.0) -> list[float]:
    """Snapshot ladder plus ``per_decade`` log-spaced norm records per decade."""
    base = snapshot_times(t_max)
    lo = max(t_start, 1e-1)
    n = max(2, int(math.ceil(per_decade * math.log10(t_max / lo))) + 1)
    extra = list(np.geomspace(lo, t_max, n))
    ts = sorted(set(round(t, 12) for t in base + extra + [t_max] if t > t_start))
    return ts


# ------------------------------------------------------------------ records


@dataclass
class TrajectoryRecord:
    """Norms at every record time and fields on the snapshot ladder."""

    times: list = field(default_factory=list)
    sup_u: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    h1_w: list = field(default_factory=list)
    w_at_0: list = field(default_factory=list)
    sup_w: list = field(default_factory=list)
    snap_times: list = field(default_factory=list)
    w_snapshots: list = field(default_factory=list)
    u_snapshots: list = field(default_factory=list)
    w_records: list = field(default_factory=list)
    steps: int = 0

    def add(self, b: DistortedBasis, t: float, u: np.ndarray | None, w: np.ndarray, snapshot: bool):
        self.times.append(float(t))
        if u is not None:
            self.sup_u.append(float(np.max(np.abs(u))))
            self.mass.append(l2_norm(u, b.wx))
        else:
            self.sup_u.append(float("nan"))
            self.mass.append(l2_norm(w, b.wk))
        self.h1_w.append(h1_norm(w, b.k, b.wk))
        self.w_at_0.append(float(abs(w[len(b.k) // 2])))
        self.sup_w.append(float(np.max(np.abs(w))))
        self.w_records.append(w.copy())
        if snapshot:
            self.snap_times.append(float(t))
            self.w_snapshots.append(SpectralField.from_values(b.k, w.copy()))
            if u is not None:
                self.u_snapshots.append(PhysicalField.from_values(b.x, u.copy()))

    def mass_drift(self) -> float:
        m = np.asarray(self.mass)
        return float(np.max(np.abs(m / m[0] - 1)))

    def w_record(self, t: float) -> np.ndarray:
        """Profile w at record time ``t``."""
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        if abs(self.times[i] - t) > 1e-9 * max(t, 1.0):
            raise KeyError(f"no record at t={t}")
        return self.w_records[i]

    def snapshot(self, t: float) -> tuple[SpectralField, PhysicalField | None]:
        i = int(np.argmin(np.abs(np.asarray(self.snap_times) - t)))
        if abs(self.snap_times[i] - t) > 1e-9 * t:
            raise KeyError(f"no snapshot at t={t}")
        u = self.u_snapshots[i] if self.u_snapshots else None
        return self.w_snapshots[i], u

    def as_table(self) -> dict:
        return {"t": self.times, "sup_u": self.sup_u, "mass": self.mass, "h1_w": self.h1_w,
                "w_at_0": self.w_at_0}


# ------------------------------------------------------------------ split step


class _Kicker:
    def __init__(self, b: DistortedBasis, lam: float, filter_frac: float | None = None):
        self.b, self.lam = b, lam
        self.k2 = 0.5 * b.k**2
        self.keep = None if filter_frac is None else np.abs(b.k) <= filter_frac * b.k_max

    def u_of(self, w: np.ndarray, t: float) -> np.ndarray:
        return self.b.Finv(np.exp(-1j * t * self.k2) * w)

    def w_of(self, u: np.ndarray, t: float) -> np.ndarray:
        return np.exp(1j * t * self.k2) * self.b.F(u)

    def kick(self, w: np.ndarray, t: float, tau: float) -> tuple[np.ndarray, np.ndarray]:
        u = self.u_of(w, t)
        u = u * np.exp(-1j * self.lam * np.abs(u) ** 2 * tau)
        w = self.w_of(u, t)
        if self.keep is not None:
            w = np.where(self.keep, w, 0.0)
        return w, u


def _check_data(b: DistortedBasis, u0: np.ndarray, cfg: NlsConfig) -> None:
    size = data_size(b, u0)
    if size > cfg.epsilon * (1 + 1e-9):
        raise ConfigError(f"data size {size:.4g} exceeds epsilon = {cfg.epsilon:g}")
    if cfg.check_parity:
        par = infer_parity(u0)
        if par != cfg.parity:
            raise ConfigError(f"data parity {par.value} does not match configured {cfg.parity.value}")


def solve_nls(b: DistortedBasis, u0, cfg: NlsConfig, t_records=None, check_data: bool = True) -> TrajectoryRecord:
    """Strang split-step solution from t = 0 to ``cfg.t_max``.

    Records norms at ``t_records`` (default: the snapshot ladder plus
    ``cfg.records_per_decade`` log-spaced times) and fields on the
    snapshot ladder {1, sqrt(10), 10, ...}.
    """
    v = u0.values if isinstance(u0, PhysicalField) else np.asarray(u0, dtype=complex)
    if v.shape != b.x.shape:
        raise GridMismatch("data is not sampled on the basis x-grid")
    if check_data:
        _check_data(b, v, cfg)
    kick = _Kicker(b, cfg.lam, cfg.filter_frac)
    snaps = set(round(t, 12) for t in snapshot_times(cfg.t_max))
    recs = list(t_records) if t_records is not None else record_times(cfg.t_max, cfg.records_per_decade)
    recs = sorted(set(round(float(t), 12) for t in recs if 0 < t <= cfg.t_max * (1 + 1e-12)))
    traj = TrajectoryRecord()
    w = b.F(v.astype(complex))
    traj.add(b, 0.0, v.astype(complex), w, snapshot=False)
    sup0 = traj.sup_u[0]
    nonlinear = cfg.lam != 0.0
    t, pending = 0.0, 0.0
    for t_rec in recs:
        while t < t_rec * (1 - 1e-13):
            dt = cfg.step(t)
            if t + dt > t_rec * (1 - 1e-9):
                dt = t_rec - t
            tau = pending + 0.5 * dt
            if nonlinear:
                w, _ = kick.kick(w, t, tau)
            t = t_rec if abs(t + dt - t_rec) < 1e-12 * t_rec else t + dt
            pending = 0.5 * dt
            traj.steps += 1
        if nonlinear:
            w, u = kick.kick(w, t, pending)
        else:
            u = kick.u_of(w, t)
        pending = 0.0
        snap = round(t_rec, 12) in snaps
        traj.add(b, t, u, w, snapshot=snap)
        warn_if_escaping(u, stacklevel=2)
        drift = abs(traj.mass[-1] / traj.mass[0] - 1)
        if drift > cfg.mass_tol:
            raise MassDrift(f"relative mass error {drift:.2e} at t={t:g} (tol {cfg.mass_tol:g})")
        if traj.sup_u[-1] > 10 * sup0:
            raise BlowupGuard(f"sup|u| grew from {sup0:.3g} to {traj.sup_u[-1]:.3g} by t={t:g}")
    return traj


def w_profile(b: DistortedBasis, u: np.ndarray, t: float) -> SpectralField:
    """w(t) = exp(i t k^2/2) F u(t)."""
    return SpectralField.from_values(b.k, np.exp(0.5j * t * b.k**2) * b.F(u))


# ------------------------------------------------------------------ w-frame


def w_frame_rhs(b: DistortedBasis, w: np.ndarray, t: float, lam: float) -> np.ndarray:
    """dw/d(log t) = -i lambda V(t)^-1 (|V(t) w|^2 V(t) w)."""
    f = FactorizationOps(b, t)
    v = apply_V(f, w).values
    return -1j * lam * apply_V_inv(f, np.abs(v) ** 2 * v, decay_tol=1e-6).values


def _rk4(b, w, t, dtau, lam):
    k1 = w_frame_rhs(b, w, t, lam)
    k2 = w_frame_rhs(b, w + 0.5 * dtau * k1, t * math.exp(0.5 * dtau), lam)
    k3 = w_frame_rhs(b, w + 0.5 * dtau * k2, t * math.exp(0.5 * dtau), lam)
    k4 = w_frame_rhs(b, w + dtau * k3, t * math.exp(dtau), lam)
    return w + dtau / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def evolve_w_frame(b: DistortedBasis, w1, cfg: NlsConfig, dtau: float = 0.01, t_records=None,
                   richardson_every: int = 25, richardson_tol: float = 1e-8) -> TrajectoryRecord:
    """RK4 in tau = log t from t = 1 to ``cfg.t_max`` starting from ``w1``.

    Every ``richardson_every`` steps the step is repeated as two half steps;
    if the two disagree by more than ``richardson_tol`` times sup|w| the run
    stops with :class:`StepRejected`.
    """
    w = np.array(w1.values if isinstance(w1, SpectralField) else w1, dtype=complex)
    if w.shape != b.k.shape:
        raise GridMismatch("profile is not sampled on the basis k-grid")
    if cfg.t_max < 1:
        raise ConfigError("the w-frame runs on t >= 1")
    snaps = set(round(t, 12) for t in snapshot_times(cfg.t_max))
    recs = list(t_records) if t_records is not None else record_times(cfg.t_max, cfg.records_per_decade, 1.0)
    recs = sorted(set(round(float(t), 12) for t in recs if 1 < t <= cfg.t_max * (1 + 1e-12)))
    traj = TrajectoryRecord()
    traj.add(b, 1.0, None, w, snapshot=1.0 in snaps)
    if cfg.lam == 0.0:
        for t_rec in recs:
            traj.add(b, t_rec, None, w, snapshot=round(t_rec, 12) in snaps)
        return traj
    tau = 0.0
    for t_rec in recs:
        tau_rec = math.log(t_rec)
        while tau < tau_rec - 1e-13:
            h = min(dtau, tau_rec - tau)
            t = math.exp(tau)
            new = _rk4(b, w, t, h, cfg.lam)
            traj.steps += 1
            if richardson_every and traj.steps % richardson_every == 0:
                half = _rk4(b, _rk4(b, w, t, 0.5 * h, cfg.lam), t * math.exp(0.5 * h), 0.5 * h, cfg.lam)
                est = float(np.max(np.abs(half - new))) / 15.0
                scale = max(float(np.max(np.abs(w))), 1e-300)
                if est > richardson_tol * scale:
                    raise StepRejected(f"Richardson estimate {est:.2e} at t={t:g} exceeds tolerance")
            w = new
            tau = tau_rec if abs(tau + h - tau_rec) < 1e-12 else tau + h
        traj.add(b, t_rec, None, w, snapshot=round(t_rec, 12) in snaps)
    return traj


# ------------------------------------------------------------------ asymptotics


@dataclass(frozen=True, eq=False)
class AsymptoticProfile:
    k: np.ndarray
    Xi: np.ndarray
    v_plus: np.ndarray
    w_plus: np.ndarray
    cauchy_residuals: list
    lam: float

    def modulus_defect(self) -> float:
        """max | |w+|^2 - |v+|^2 |."""
        return float(np.max(np.abs(np.abs(self.w_plus) ** 2 - np.abs(self.v_plus) ** 2)))

    def to_dict(self) -> dict:
        return {
            "k": self.k.tolist(),
            "Xi": self.Xi.tolist(),
            "v_plus": [[float(z.real), float(z.imag)] for z in self.v_plus],
            "w_plus": [[float(z.real), float(z.imag)] for z in self.w_plus],
            "cauchy_residuals": [[t, r] for t, r in self.cauchy_residuals],
        }


def phase_corrected(w: np.ndarray, t: float, lam: float) -> np.ndarray:
    """y(t, k) = w exp(i lambda |w|^2 log t)."""
    return w * np.exp(1j * lam * np.abs(w) ** 2 * math.log(t))


def cauchy_residuals(traj: TrajectoryRecord, lam: float, t_min: float = 0.0,
                     box_length: float | None = None, trim: float = 0.05) -> list:
    """(t_2, ||y(t_2) - y(t_1)||_inf) for consecutive snapshots with t_1 >= t_min.

    With ``box_length`` L the sup runs over |k| <= (1 - trim) L / t_2 only:
    content at larger k has reached |x| = t k > L and is no longer resolved
    by the box.
    """
    ts = traj.snap_times
    ys = [phase_corrected(s.values, t, lam) for s, t in zip(traj.w_snapshots, ts)]
    out = []
    for i in range(len(ts) - 1):
        if ts[i] < t_min:
            continue
        d = np.abs(ys[i + 1] - ys[i])
        if box_length is not None:
            d = d[np.abs(traj.w_snapshots[i].k) <= (1 - trim) * box_length / ts[i + 1]]
        out.append((ts[i + 1], float(np.max(d, initial=0.0))))
    return out


def reflect_combine(k: np.ndarray, v: np.ndarray, s: ScatteringData) -> np.ndarray:
    """T(|k|) v(k) + R(|k|) v(-k) on a symmetric k-grid."""
    T, R = s.at(k)
    return T * v + R * v[::-1]


def extract_profile(traj: TrajectoryRecord, cfg: NlsConfig, s: ScatteringData,
                    box_length: float | None = None) -> AsymptoticProfile:
    """Modified final state from the snapshot ladder."""
    ts = traj.snap_times
    if len(ts) < 4 or ts[-1] < 100 * (1 - 1e-9):
        raise ConfigError("need at least four snapshots and t_max >= 100")
    w_last = traj.w_snapshots[-1]
    k = w_last.k
    res = cauchy_residuals(traj, cfg.lam, box_length=box_length)
    if len(res) >= 2 and res[-1][1] > res[-2][1]:
        raise NotConverged(f"Cauchy residual rose from {res[-2][1]:.3e} to {res[-1][1]:.3e}")
    v_plus = phase_corrected(w_last.values, ts[-1], cfg.lam)
    w_plus = reflect_combine(k, v_plus, s)
    return AsymptoticProfile(k, np.abs(w_last.values) ** 2, v_plus, w_plus, res, cfg.lam)


def asymptotic_formula_residual(traj: TrajectoryRecord, prof: AsymptoticProfile, b: DistortedBasis,
                                t: float, trim: float = 0.05) -> float:
    """sup over the window of |u(t) - M D_t (w+ exp(-i lambda |w+|^2 log t))|."""
    if t < 10 * (1 - 1e-12):
        raise ConfigError("the asymptotic formula is checked for t >= 10")
    _, u = traj.snapshot(t)
    if u is None:
        raise ConfigError("trajectory holds no physical snapshots")
    f = FactorizationOps(b, t)
    y = b.x / t
    mask = f.window_mask(y, trim)
    wp = prof.w_plus * np.exp(-1j * prof.lam * np.abs(prof.w_plus) ** 2 * math.log(t))
    wy = CubicSpline(prof.k, wp.real)(y[mask]) + 1j * CubicSpline(prof.k, wp.imag)(y[mask])
    approx = np.exp(0.5j * b.x[mask] ** 2 / t) * wy / f.sqrt_it
    return float(np.max(np.abs(u.values[mask] - approx)))


def xt_norm_proxy(traj: TrajectoryRecord, beta: float) -> np.ndarray:
    """sup|w| + <t>^-beta ||w||_{H^1} at every record."""
    t = np.asarray(traj.times)
    return np.asarray(traj.sup_w) + (1 + t * t) ** (-beta / 2) * np.asarray(traj.h1_w)


__all__ = [
    "NlsConfig",
    "TrajectoryRecord",
    "AsymptoticProfile",
    "solve_nls",
    "evolve_w_frame",
    "w_frame_rhs",
    "w_profile",
    "extract_profile",
    "asymptotic_formula_residual",
    "cauchy_residuals",
    "phase_corrected",
    "reflect_combine",
    "snapshot_times",
    "record_times",
    "parity_for",
    "odd_data",
    "even_data",
    "data_size",
    "l2_norm",
    "h1_norm",
    "weighted_norm",
    "fft_derivative",
    "xt_norm_proxy",
    "LADDER",
]
