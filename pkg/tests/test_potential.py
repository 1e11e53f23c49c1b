import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dscatter.errors import ConfigError, DomainTooSmall
from dscatter.potential import (
    Gaussian,
    Piecewise,
    SquareWellPair,
    builtin,
    check_condition_1,
    fragments,
    load_potential,
    make_grid,
    potential_from_dict,
    sample,
    solve_well_depth,
)


def test_well_depth_solves_matching_condition():
    A = solve_well_depth()
    B = math.pi / 4
    assert abs(A * math.tanh(A) - B * math.tan(B)) < 1e-12
    assert 0.5 < A < 2.0


@given(st.floats(0.2, 1.3))
def test_well_depth_any_b(b):
    A = solve_well_depth(b)
    assert A * math.tanh(A) == pytest.approx(b * math.tan(b), rel=1e-10, abs=1e-12)


@given(st.integers(8, 12), st.floats(1.0, 100.0))
def test_grid_is_symmetric_and_nests(m, L):
    N = 2**m + 1
    x = make_grid(L, N)
    assert np.array_equal(x, -x[::-1])
    assert x[0] == -L and x[-1] == L
    fine = make_grid(L, 2 * N - 1)
    np.testing.assert_allclose(fine[::2], x, rtol=0, atol=1e-12 * L)


def test_pair_values_and_one_sided_limits():
    p = SquareWellPair()
    top, bottom = 0.5 * p.A**2, -0.5 * p.B**2
    assert p.value(np.array([0.5]))[0] == pytest.approx(top)
    assert p.value(np.array([1.5]))[0] == pytest.approx(bottom)
    assert p.value(np.array([1.0]), side=-1)[0] == pytest.approx(top)
    assert p.value(np.array([1.0]), side=+1)[0] == pytest.approx(bottom)
    assert p.value(np.array([2.5]))[0] == 0.0
    assert p.support() == (-2.0, 2.0)


def test_sample_rejects_small_box():
    with pytest.raises(DomainTooSmall):
        sample(builtin("square_well_pair"), 2.0, 257)
    with pytest.raises(ConfigError):
        sample(builtin("zero"), -1.0, 257)


def test_sampled_pair_is_symmetric_with_breakpoints_on_nodes():
    p = sample(builtin("square_well_pair"), 16.0, 1025)
    assert p.symmetric
    assert p.mirror_defect() == 0.0
    for b in p.breakpoints:
        assert np.min(np.abs(p.x - b)) == 0.0
    assert len(fragments(p)) == 6


def test_condition_report(pair_small):
    assert check_condition_1(pair_small).all_ok()
    lopsided = sample(Piecewise(((0.0, 1.0, 1.0),)), 10.0, 257)
    assert not check_condition_1(lopsided).symmetric


@pytest.mark.parametrize("spec", [SquareWellPair(), Gaussian(0.5, 2.0), builtin("zero"),
                                  Piecewise(((-1.0, 1.0, -0.3),))])
def test_dict_round_trip(spec):
    again = potential_from_dict(json.loads(json.dumps(spec.to_dict())))
    x = np.linspace(-5, 5, 101)
    np.testing.assert_array_equal(again.value(x), spec.value(x))


def test_load_potential_files(tmp_path):
    j = tmp_path / "p.json"
    j.write_text(json.dumps({"kind": "gaussian", "amp": 1.0, "width": 1.0}))
    assert isinstance(load_potential(j), Gaussian)
    t = tmp_path / "p.toml"
    t.write_text('[potential]\nkind = "square_well_pair"\nA = "auto"\n')
    assert isinstance(load_potential(t), SquareWellPair)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_potential(bad)
    with pytest.raises(ConfigError):
        potential_from_dict({"kind": "nonsense"})


def test_overlapping_segments_rejected():
    with pytest.raises(ConfigError):
        Piecewise(((0.0, 2.0, 1.0), (1.0, 3.0, 1.0)))


def test_unknown_builtin():
    with pytest.raises(ConfigError):
        builtin("nope")
