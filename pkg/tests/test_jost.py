import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dscatter.errors import GridMismatch
from dscatter.jost import MINUS, PLUS, compute_jost, ode_defect, volterra_oracle, wronskian
from dscatter.potential import Gaussian, Piecewise, builtin, sample


def test_zero_potential_gives_plane_waves():
    p = sample(builtin("zero"), 10.0, 257)
    j = compute_jost(p, np.linspace(0, 3, 7), PLUS)
    np.testing.assert_array_equal(j.m, 1.0)
    np.testing.assert_array_equal(j.dm_dx, 0.0)


def test_normalization_beyond_support(pair_small):
    k = np.linspace(0.1, 4, 9)
    jp = compute_jost(pair_small, k, PLUS)
    jm = compute_jost(pair_small, k, MINUS)
    right = pair_small.x >= 2
    left = pair_small.x <= -2
    np.testing.assert_allclose(jp.m[right], 1.0, atol=1e-13)
    np.testing.assert_allclose(jm.m[left], 1.0, atol=1e-13)
    assert jp.boundary_defect() < 1e-13


def test_matches_volterra_oracle(pair_small):
    k = np.array([0.0, 0.3, 1.0, 2.5])
    for sign in (PLUS, MINUS):
        j = compute_jost(pair_small, k, sign)
        for col, kk in enumerate(k):
            ref = volterra_oracle(pair_small, kk, sign, iterations=40)
            inside = np.abs(pair_small.x) <= 3
            err = np.max(np.abs(j.m[inside, col] - ref(pair_small.x[inside])))
            assert err < 2e-4, (sign, kk, err)


def test_oracle_gap_shrinks_with_grid():
    """The Magnus route is fourth order, the oracle is refined: the gap falls about 16x per halving."""
    spec = Gaussian(1.0, 1.0)
    errs = []
    for N in (257, 513):
        p = sample(spec, 10.0, N)
        j = compute_jost(p, np.array([1.0]), PLUS)
        ref = volterra_oracle(p, 1.0, PLUS, iterations=40, refine=16)
        inside = np.abs(p.x) <= 4
        errs.append(np.max(np.abs(j.m[inside, 0] - ref(p.x[inside]))))
    assert errs[0] / errs[1] > 3


def test_rk4_and_magnus_agree(pair_small):
    k = np.array([0.5, 2.0])
    a = compute_jost(pair_small, k, PLUS, method="magnus")
    b = compute_jost(pair_small, k, PLUS, method="rk4")
    assert np.max(np.abs(a.m - b.m)) < 1e-6


def test_wronskian_is_independent_of_x(pair_small):
    k = np.array([0.7])
    jp, jm = compute_jost(pair_small, k, PLUS), compute_jost(pair_small, k, MINUS)
    vals = [wronskian(jp, jm, 0.7, x) for x in pair_small.x[::64]]
    assert np.ptp(np.abs(vals)) < 1e-6 * np.abs(vals[0])


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.3, 1.2))
def test_residual_is_second_order_for_gaussians(amp, width):
    r = []
    for N in (513, 1025):
        p = sample(Gaussian(amp, width), 12.0, N)
        r.append(compute_jost(p, np.array([0.0, 1.0, 3.0]), PLUS).ode_residual)
    assert 3.5 < r[0] / r[1] < 4.5


def test_rows_restriction_matches_full(pair_small):
    k = np.array([0.4, 1.3])
    full = compute_jost(pair_small, k, MINUS)
    rows = slice(400, 600)
    part = compute_jost(pair_small, k, MINUS, rows=rows)
    np.testing.assert_allclose(part.m, full.m[rows], atol=1e-13)


def test_interpolation_hits_nodes(pair_small):
    j = compute_jost(pair_small, np.array([1.0]), PLUS)
    m, dm = j.interpolate(j.x[100:110])
    np.testing.assert_allclose(m, j.m[100:110], atol=1e-14)
    np.testing.assert_allclose(dm, j.dm_dx[100:110], atol=1e-12)


def test_errors(pair_small):
    with pytest.raises(GridMismatch):
        compute_jost(pair_small, np.array([[1.0]]), PLUS)
    with pytest.raises(ValueError):
        compute_jost(pair_small, np.array([1.0]), 0)
    j = compute_jost(pair_small, np.array([1.0]), PLUS)
    with pytest.raises(GridMismatch):
        j.k_index(2.0)
    narrow = sample(Piecewise(((-9.99, 9.99, 0.1),)), 10.0, 257)
    with pytest.raises(GridMismatch):
        compute_jost(narrow, np.array([1.0]), PLUS)


def test_ode_defect_skips_jump_stencils(pair_small):
    j = compute_jost(pair_small, np.array([1.0]), PLUS)
    assert ode_defect(pair_small, j.k, j.f())[0] == pytest.approx(j.ode_residual)
