import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dscatter.errors import AliasWarning, GridMismatch, TruncationViolation
from dscatter.potential import builtin, sample
from dscatter.transform import (
    Parity,
    _Bluestein,
    build_basis,
    classical_pair,
    eigen_defect,
    forward,
    free_basis,
    infer_parity,
    inverse,
    make_kgrid,
    symmetry_defect,
    unitarity_defects,
)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 300), st.integers(1, 300), st.floats(1e-4, 3.0))
def test_bluestein_matches_direct_sum(n, m, theta):
    rng = np.random.default_rng(n * 1000 + m)
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    direct = np.exp(-1j * theta * np.outer(np.arange(m), np.arange(n))) @ a
    np.testing.assert_allclose(_Bluestein(n, m, theta)(a), direct, atol=1e-10 * np.sum(np.abs(a)))


def test_bluestein_long_chirp_stays_accurate():
    n = 20001
    theta = math.pi / (n - 1)
    a = np.exp(-np.linspace(-6, 6, n) ** 2) + 0j
    out = _Bluestein(n, n, theta)(a)
    j = np.array([0, 17, 5000, 19999])
    direct = np.array([np.sum(a * np.exp(-1j * theta * jj * np.arange(n))) for jj in j])
    assert np.max(np.abs(out[j] - direct)) < 1e-11 * np.sum(np.abs(a))


def test_free_transform_of_gaussian_is_gaussian():
    p = sample(builtin("zero"), 20.0, 2049)
    b = build_basis(p, 8.0, 1025)
    np.testing.assert_allclose(b.F(np.exp(-0.5 * p.x**2)), np.exp(-0.5 * b.k**2), atol=1e-12)
    F0, F0inv = classical_pair(p.x, b.k)
    np.testing.assert_allclose(F0inv(np.exp(-0.5 * b.k**2)), np.exp(-0.5 * p.x**2), atol=1e-12)


def test_free_basis_columns_are_plane_waves():
    x = np.linspace(-5, 5, 65)
    k = make_kgrid(3.0, 33)
    b = free_basis(x, k)
    np.testing.assert_allclose(b.psi(), np.exp(1j * np.outer(x, k)), atol=1e-14)


def test_structured_transform_matches_dense_matrix(pair_basis):
    b = pair_basis
    b.jump_correction = False
    try:
        rng = np.random.default_rng(0)
        phi = np.exp(-0.3 * b.x**2) * (rng.standard_normal(len(b.x)) + 1j)
        psi = b.psi()
        dense_F = (psi.conj().T @ (b.wx * phi)) / math.sqrt(2 * math.pi)
        np.testing.assert_allclose(b.F(phi), dense_F, atol=1e-10)
        c = np.exp(-b.k**2) * (1 + 0.5j * b.k)
        dense_inv = psi @ (b.wk * c) / math.sqrt(2 * math.pi)
        np.testing.assert_allclose(b.Finv(c), dense_inv, atol=1e-10)
    finally:
        b.jump_correction = True


def test_round_trip_and_norm(pair_basis):
    x = pair_basis.x
    for f in (np.exp(-0.5 * x**2), x * np.exp(-0.5 * x**2), np.exp(-((x - 3) ** 2))):
        sup, norm = unitarity_defects(pair_basis, f)
        assert sup < 2e-5 and norm < 1e-8


@pytest.mark.parametrize("scale", [0.0, 2.0])
def test_zero_column_weight_is_immaterial(pair_basis, scale, monkeypatch):
    # the k = 0 column is an extrapolated limit; a single-node weight change is an O(dk) effect
    b = pair_basis
    x, mid = b.x, len(b.k) // 2
    f = np.exp(-0.5 * x**2) + 0j
    w = b.F(f)
    ref = b.Finv(w)
    wk = b.wk.copy()
    wk[mid] *= scale
    monkeypatch.setattr(b, "wk", wk)
    moved = b.Finv(w)
    monkeypatch.undo()
    assert np.max(np.abs(moved - ref)) < 2 * b.wk[mid] * np.max(np.abs(w))


def test_jump_correction_helps(pair_basis):
    f = np.exp(-0.5 * pair_basis.x**2)
    on = unitarity_defects(pair_basis, f)
    pair_basis.jump_correction = False
    try:
        off = unitarity_defects(pair_basis, f)
    finally:
        pair_basis.jump_correction = True
    assert on[0] < off[0] / 2


def test_parity_is_preserved(pair_basis):
    x = pair_basis.x
    assert infer_parity(pair_basis.F(x * np.exp(-(x**2))), 1e-9) == Parity.ODD
    assert infer_parity(pair_basis.F(np.exp(-(x**2))), 1e-9) == Parity.EVEN
    assert infer_parity(np.exp(-(x - 1) ** 2)) == Parity.NONE


def test_mirror_symmetry_of_waves(pair_basis):
    assert symmetry_defect(pair_basis) < 1e-10


def test_zero_energy_column_is_the_limit():
    """Psi(x, 0) is the k -> 0 limit: the gap to the nearest column is O(dk)."""
    p = sample(builtin("square_well_pair"), 16.0, 1025)
    near = np.abs(p.x) <= 3
    gaps = []
    for k_max in (0.02, 0.01):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AliasWarning)
            b = build_basis(p, k_max, 11)
        c = len(b.k) // 2
        cols = b.psi([c, c + 1, c - 1])
        gaps.append(max(np.max(np.abs(cols[near, 0] - cols[near, j])) for j in (1, 2)))
    assert gaps[1] < 0.02
    assert 1.8 < gaps[0] / gaps[1] < 2.2


def test_eigen_defect_small():
    p = sample(builtin("square_well_pair"), 20.0, 2049)
    b = build_basis(p, 8.0, 1025)
    assert np.max(eigen_defect(b, [0.5, 1.0, 2.0])) < 1e-3


def test_preconditions(pair_basis):
    with pytest.raises(TruncationViolation):
        forward(pair_basis, np.ones(len(pair_basis.x)))
    with pytest.raises(GridMismatch):
        forward(pair_basis, np.ones(5))
    with pytest.raises(GridMismatch):
        inverse(pair_basis, np.ones(5))
    with pytest.raises(GridMismatch):
        pair_basis.k_index(0.123456789)


def test_alias_warning_for_coarse_k_spacing():
    p = sample(builtin("square_well_pair"), 16.0, 513)
    with pytest.warns(AliasWarning):
        build_basis(p, math.pi / p.h, 129)
    with warnings.catch_warnings():
        warnings.simplefilter("error", AliasWarning)
        build_basis(p, math.pi / (2 * p.h), 513)


def test_dump_psi_round_trip(tmp_path):
    p = sample(builtin("square_well_pair"), 8.0, 129)
    b = build_basis(p, 4.0, 129)
    path = tmp_path / "psi.bin"
    b.dump_psi(path)
    back = np.fromfile(path, dtype="<c16").reshape(len(b.x), len(b.k))
    np.testing.assert_array_equal(back, b.psi())


def test_kgrid_validation():
    with pytest.raises(ValueError):
        make_kgrid(1.0, 10)
    with pytest.raises(ValueError):
        make_kgrid(-1.0, 11)
    assert make_kgrid(2.0, 5)[2] == 0.0
