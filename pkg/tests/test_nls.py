import math

import numpy as np
import pytest

from dscatter.errors import ConfigError, GridMismatch, MassDrift
from dscatter.factorization import evolve_linear
from dscatter.nls import (
    NlsConfig,
    Parity,
    TrajectoryRecord,
    cauchy_residuals,
    data_size,
    even_data,
    evolve_w_frame,
    extract_profile,
    odd_data,
    parity_for,
    phase_corrected,
    record_times,
    reflect_combine,
    snapshot_times,
    solve_nls,
    w_profile,
    xt_norm_proxy,
)


@pytest.mark.parametrize("kw", [dict(epsilon=0), dict(t_max=-1), dict(beta=0.2), dict(dt="fixed"),
                                dict(dt=-0.1)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        NlsConfig(**kw)


def test_adaptive_step_clips():
    c = NlsConfig(dt_rel=0.1, dt_min=0.05, dt_max=1.0)
    assert c.step(0.0) == 0.05 and c.step(5.0) == pytest.approx(0.5) and c.step(100.0) == 1.0
    assert NlsConfig(dt=0.2).step(50.0) == 0.2


def test_parity_for():
    assert parity_for(1.0) is Parity.ODD
    assert parity_for(-1.0) is Parity.EVEN
    assert parity_for(0.0) is Parity.NONE


def test_time_ladders():
    assert snapshot_times(100.0) == pytest.approx([1.0, math.sqrt(10), 10.0, math.sqrt(1000), 100.0])
    r = record_times(100.0, 5)
    assert r == sorted(r) and r[-1] == pytest.approx(100.0)
    assert all(any(abs(s - t) < 1e-9 for t in r) for s in snapshot_times(100.0))
    assert min(record_times(100.0, 5, t_start=1.0)) > 1.0


def test_data_normalization_and_shape(nls_basis_small):
    b = nls_basis_small
    u = odd_data(b, 0.05)
    assert data_size(b, u) == pytest.approx(0.05, rel=1e-12)
    np.testing.assert_allclose(u, -u[::-1], atol=1e-14)
    ue = even_data(b, 0.05)
    np.testing.assert_allclose(ue, ue[::-1], atol=1e-14)
    plain = odd_data(b, 0.05, distorted=False)
    g = b.x * np.exp(-(b.x**2))
    np.testing.assert_allclose(plain / np.max(np.abs(plain)), g / np.max(np.abs(g)), atol=1e-14)


def test_data_checks(nls_basis_small):
    b = nls_basis_small
    cfg = NlsConfig(epsilon=0.05, t_max=1.0)
    with pytest.raises(ConfigError):
        solve_nls(b, odd_data(b, 0.1), cfg)
    with pytest.raises(ConfigError):
        solve_nls(b, even_data(b, 0.05), cfg)
    with pytest.raises(GridMismatch):
        solve_nls(b, np.zeros(5), cfg)


def test_zero_coupling_is_linear_flow(nls_basis_small):
    b = nls_basis_small
    u0 = odd_data(b, 0.05)
    traj = solve_nls(b, u0, NlsConfig(lam=0.0, epsilon=0.05, t_max=10.0))
    _, u = traj.snapshot(10.0)
    lin = evolve_linear(b, u0, 10.0, decay_tol=1e-4).values
    assert np.max(np.abs(u.values - lin)) < 1e-10
    # w is conserved by the linear flow
    assert np.max(np.abs(traj.w_record(10.0) - traj.w_records[0])) < 1e-12


def test_short_run_mass_and_profile(nls_basis_small):
    b = nls_basis_small
    traj = solve_nls(b, odd_data(b, 0.05), NlsConfig(epsilon=0.05, t_max=10.0, dt_rel=0.05, dt_min=0.05))
    assert traj.mass_drift() < 1e-6
    _, u = traj.snapshot(10.0)
    np.testing.assert_allclose(w_profile(b, u.values, 10.0).values, traj.w_record(10.0), atol=1e-8)
    assert xt_norm_proxy(traj, 0.1).shape == (len(traj.times),)
    with pytest.raises(KeyError):
        traj.w_record(7.77)
    with pytest.raises(KeyError):
        traj.snapshot(7.77)


def test_mass_guard(nls_basis_small):
    b = nls_basis_small
    with pytest.raises(MassDrift):
        solve_nls(b, odd_data(b, 0.5), NlsConfig(epsilon=0.5, t_max=5.0, dt=0.5, mass_tol=1e-14))


def test_w_frame_zero_coupling_is_constant(nls_basis_small):
    b = nls_basis_small
    w1 = b.k * np.exp(-(b.k**2)) + 0j
    traj = evolve_w_frame(b, w1, NlsConfig(lam=0.0, t_max=10.0))
    assert np.array_equal(traj.w_record(10.0), w1)
    with pytest.raises(ConfigError):
        evolve_w_frame(b, w1, NlsConfig(t_max=0.5))


def test_phase_correction_and_reflection(pair_basis):
    w = np.array([0.5, 1.0 + 1j])
    y = phase_corrected(w, math.e, 2.0)
    np.testing.assert_allclose(np.abs(y), np.abs(w))
    np.testing.assert_allclose(y, w * np.exp(2j * np.abs(w) ** 2))
    b = pair_basis
    v = np.exp(-((b.k - 1) ** 2)) + 0j
    out = reflect_combine(b.k, v, b.scattering)
    T, R = b.scattering.at(b.k)
    np.testing.assert_allclose(out, T * v + R * v[::-1])
    # |T|^2 + |R|^2 = 1 with T conj(R) + R conj(T) = 0 makes the combination an isometry
    assert np.sum(b.wk * np.abs(out) ** 2) == pytest.approx(np.sum(b.wk * np.abs(v) ** 2), rel=1e-6)


def _fake_traj(k, ws, ts):
    from dscatter.transform import SpectralField
    tr = TrajectoryRecord()
    tr.snap_times = list(ts)
    tr.w_snapshots = [SpectralField.from_values(k, w) for w in ws]
    return tr


def test_cauchy_window():
    k = np.linspace(-4, 4, 81)
    base = np.exp(-(k**2)) + 0j
    bump = np.where(np.abs(k) > 3, 1.0, 0.0)
    tr = _fake_traj(k, [base, base + bump], [1.0, 10.0])
    assert cauchy_residuals(tr, 0.0)[0][1] == pytest.approx(1.0)
    assert cauchy_residuals(tr, 0.0, box_length=20.0)[0][1] == 0.0


def test_extract_profile_guards(pair_basis):
    k = pair_basis.k
    ts = snapshot_times(10.0)
    tr = _fake_traj(k, [np.zeros_like(k, dtype=complex)] * len(ts), ts)
    with pytest.raises(ConfigError):
        extract_profile(tr, NlsConfig(), pair_basis.scattering)
