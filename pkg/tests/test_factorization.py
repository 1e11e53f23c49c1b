import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dscatter.errors import ConfigError, NotExceptional, ParityMismatch, RescaleOutOfRange
from dscatter.factorization import (
    FRESNEL_WEIGHT,
    FactorizationOps,
    apply_MD,
    apply_V,
    apply_V0,
    apply_V_at,
    apply_V_inv,
    edge_mass_fraction,
    evolve_linear,
    expansion_profile,
    factorization_defect,
    fit_loglog_slope,
    fresnel_tail,
)
from dscatter.potential import builtin, sample
from dscatter.transform import build_basis


def fresnel_oracle(z):
    """int_z^inf exp(-i s^2/2) ds through the complementary error function."""
    r = mpmath.sqrt(mpmath.pi / 2) * mpmath.exp(-1j * mpmath.pi / 4) * mpmath.erfc(
        mpmath.exp(1j * mpmath.pi / 4) * z / mpmath.sqrt(2))
    return complex(r)


@settings(max_examples=40, deadline=None)
@given(st.floats(-30.0, 30.0))
def test_fresnel_tail_matches_erfc_form(z):
    assert abs(fresnel_tail(z) - fresnel_oracle(z)) < 1e-11


def test_fresnel_identities():
    assert abs(FRESNEL_WEIGHT * fresnel_tail(0.0) - 1) < 1e-15
    assert abs(fresnel_tail(-1e8) - math.sqrt(math.pi) * (1 - 1j)) < 1e-7
    assert abs(fresnel_tail(1e8)) < 1e-7
    np.testing.assert_allclose(fresnel_tail(np.array([0.0, 1.0])), [fresnel_tail(0.0), fresnel_tail(1.0)])


@pytest.fixture(scope="module")
def fb():
    p = sample(builtin("square_well_pair"), 64.0, 4097)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return build_basis(p, math.pi / p.h, 4097)


def test_time_floor(fb):
    with pytest.raises(ConfigError):
        FactorizationOps(fb, 0.5)
    f = FactorizationOps(fb, 4.0)
    assert f.sqrt_it == pytest.approx(2 * complex(math.cos(math.pi / 4), math.sin(math.pi / 4)))
    assert f.window == pytest.approx(16.0)


@pytest.mark.parametrize("t", [1.0, 10.0, 100.0])
def test_factorization_identity(fb, t):
    w = fb.k * np.exp(-fb.k**2) + 0j
    assert factorization_defect(FactorizationOps(fb, t), w) < 1e-14


def test_V_inverse_round_trip(fb):
    # a generic potential has transforms vanishing at k = 0, so w must too
    f = FactorizationOps(fb, 3.0)
    w = fb.k * np.exp(-(fb.k**2)) + 0j
    back = apply_V_inv(f, apply_V(f, w), decay_tol=1e-2).values
    assert np.max(np.abs(back - w)) < 1e-5


def test_V0_is_near_identity_at_late_times(fb):
    w = np.exp(-(fb.k**2)) + 0j
    d = [np.max(np.abs(apply_V0(FactorizationOps(fb, t), w).values - w)) for t in (10.0, 100.0)]
    assert d[1] < d[0] / 5


def test_apply_V_at_matches_grid_values_and_guards_range(fb):
    f = FactorizationOps(fb, 2.0)
    w = fb.k * np.exp(-(fb.k**2)) + 0j
    v = apply_V(f, w)
    np.testing.assert_allclose(apply_V_at(f, w, v.x[1000:1010]), v.values[1000:1010], atol=1e-12)
    with pytest.raises(RescaleOutOfRange):
        apply_V_at(f, w, np.array([40.0]))
    assert apply_MD(f, v).values.shape == fb.x.shape


def test_linear_group_property_and_unitarity(fb):
    u0 = np.exp(-(fb.x**2)) + 0j
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = evolve_linear(fb, evolve_linear(fb, u0, 1.5).values, 2.0, decay_tol=1e-3).values
        b = evolve_linear(fb, u0, 3.5).values
        back = evolve_linear(fb, evolve_linear(fb, u0, 2.0).values, -2.0, decay_tol=1e-3).values
    assert np.max(np.abs(a - b)) < 1e-6
    assert np.max(np.abs(back - u0)) < 1e-5
    n = lambda u: np.sum(fb.wx * np.abs(u) ** 2)
    assert abs(n(b) / n(u0) - 1) < 1e-6


def test_decay_slope_is_minus_half(fb):
    u0 = np.exp(-(fb.x**2)) + 0j
    ts = np.geomspace(2, 10, 6)
    sup = [np.max(np.abs(evolve_linear(fb, u0, t).values)) for t in ts]
    assert -0.6 < fit_loglog_slope(ts, sup) < -0.4


def test_edge_fraction():
    v = np.zeros(100)
    v[50] = 1.0
    assert edge_mass_fraction(v) == 0.0
    v[0] = 1.0
    assert edge_mass_fraction(v) == pytest.approx(0.5)


def test_expansion_guards(fb):
    s = fb.scattering
    f = FactorizationOps(fb, 10.0)
    with pytest.raises(ParityMismatch):
        expansion_profile(f, np.exp(-(fb.k**2)) + 0j, s)
    r = expansion_profile(f, fb.k * np.exp(-(fb.k**2)) + 0j, s)
    assert r.residual < 0.2 and r.window == pytest.approx(0.95 * 6.4)
    pg = sample(builtin("gaussian"), 16.0, 513)
    bg = build_basis(pg, 4.0, 513)
    with pytest.raises(NotExceptional):
        expansion_profile(FactorizationOps(bg, 10.0), bg.k * np.exp(-(bg.k**2)) + 0j, bg.scattering)


def test_expansion_residual_decays_for_even_data_with_boundary_layer():
    p = sample(builtin("odd_resonance_well"), 2048.0, 4097)
    b = build_basis(p, math.pi, 16385)
    w = np.exp(-2 * b.k**2) + 0j
    r = [expansion_profile(FactorizationOps(b, t), w, b.scattering).residual for t in (10.0, 100.0)]
    assert r[1] < r[0] / 2
