import numpy as np
import pytest

from gausslang.config import get_tolerances
from gausslang.errors import ConfigError, ContractError
from gausslang.linalg import (
    AffineSubspace,
    as_matrix,
    as_vector,
    base_change,
    col_basis,
    null_basis,
    numerical_rank,
    orthogonal_equivalent,
    pinv,
    psd_repair,
    psd_root,
    row_reduce,
    rref,
    subspace_contains,
    subspace_includes,
    svd,
)

from conftest import random_psd


def test_arrays_are_read_only():
    M = as_matrix([[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        M[0, 0] = 5.0


def test_shape_checks():
    with pytest.raises(ContractError):
        as_matrix([1, 2, 3])
    with pytest.raises(ContractError):
        as_vector([1, 2], dim=3)
    with pytest.raises(ContractError):
        as_matrix([[np.nan]])


def test_svd_reconstructs(rng):
    M = rng.standard_normal((4, 3))
    U, s, V = svd(M)
    S = np.zeros((4, 3))
    S[:3, :3] = np.diag(s)
    assert np.allclose(U @ S @ V.T, M)
    assert np.all(np.diff(s) <= 0)


@pytest.mark.parametrize(
    "M, singular_values",
    [
        (np.eye(2), [1.0, 1.0]),
        ([[0.0]], [0.0]),
        ([[3.0, 0.0], [0.0, 4.0]], [4.0, 3.0]),
    ],
)
def test_svd_examples(M, singular_values):
    U, s, V = svd(M)
    assert np.allclose(s, singular_values)
    assert np.allclose(U @ np.diag(s) @ V.T, M)


def test_svd_reconstruction_on_wide_entries(rng):
    for _ in range(100):
        rows, cols = (int(v) for v in rng.integers(1, 9, size=2))
        M = rng.uniform(-10.0, 10.0, size=(rows, cols))
        U, s, V = svd(M)
        S = np.zeros((rows, cols))
        S[: s.size, : s.size] = np.diag(s)
        assert np.linalg.norm(U @ S @ V.T - M) <= 1e-9 * np.linalg.norm(M)


def test_svd_of_empty_matrix():
    U, s, V = svd(np.zeros((0, 3)))
    assert U.shape == (0, 0) and s.shape == (0,) and V.shape == (3, 3)


def test_numerical_rank_and_bases(rng):
    B = rng.standard_normal((5, 2))
    M = B @ rng.standard_normal((2, 4))
    assert numerical_rank(M) == 2
    C = col_basis(M)
    N = null_basis(M)
    assert C.shape == (5, 2) and N.shape == (4, 2)
    assert np.allclose(C.T @ C, np.eye(2))
    assert np.allclose(M @ N, 0.0, atol=1e-10)


def test_rank_threshold_is_relative():
    assert numerical_rank(np.diag([1.0, 1e-9])) == 2
    assert numerical_rank(np.diag([1e6, 1e-3])) == 2
    assert numerical_rank(np.diag([1e6, 1e-7])) == 1
    assert numerical_rank(np.diag([1.0, 1e-15])) == 1
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_pinv_matches_moore_penrose(rng):
    M = rng.standard_normal((3, 2)) @ rng.standard_normal((2, 4))
    P = pinv(M)
    assert np.allclose(M @ P @ M, M)
    assert np.allclose(P @ M @ P, P)
    assert np.allclose(M @ P, (M @ P).T)


def test_pinv_of_a_rank_one_matrix():
    assert np.allclose(pinv([[1.0, 1.0], [1.0, 1.0]]), np.full((2, 2), 0.25))


@pytest.mark.slow
def test_penrose_conditions_on_random_matrices(rng):
    for _ in range(200):
        rows, cols = (int(v) for v in rng.integers(1, 9, size=2))
        inner = int(rng.integers(1, min(rows, cols) + 1))
        M = rng.standard_normal((rows, inner)) @ rng.standard_normal((inner, cols))
        P = pinv(M)
        assert P.shape == (cols, rows)
        assert np.linalg.norm(M @ P @ M - M) <= 1e-8 * (1.0 + np.linalg.norm(M))
        assert np.linalg.norm(P @ M @ P - P) <= 1e-8 * (1.0 + np.linalg.norm(P))
        assert np.linalg.norm(M @ P - (M @ P).T) <= 1e-8
        assert np.linalg.norm(P @ M - (P @ M).T) <= 1e-8


def test_block_ranks_against_an_outer_scale():
    tiny = [[1e-20]]
    assert np.allclose(pinv(tiny), [[1e20]])
    assert np.allclose(pinv(tiny, scale=1.0), [[0.0]])
    assert col_basis(tiny).shape == (1, 1)
    assert col_basis(tiny, scale=1.0).shape == (1, 0)
    assert np.allclose(pinv([[2.0]], scale=1.0), [[0.5]])


def test_base_change(rng):
    A = rng.standard_normal((4, 2)) @ rng.standard_normal((2, 3))
    S, T, r = base_change(A)
    assert r == 2
    assert np.allclose(T @ T.T, np.eye(3))
    expected = np.zeros((4, 3))
    expected[:2, :2] = np.eye(2)
    assert np.allclose(S @ A @ T.T, expected, atol=1e-10)
    assert numerical_rank(S) == 4


def test_psd_repair_clamps_roundoff():
    S = np.array([[1.0, 1.0], [1.0, 1.0 - 1e-14]])
    R = psd_repair(S)
    assert np.allclose(R, R.T)
    assert np.linalg.eigvalsh(R).min() >= -1e-14


def test_psd_repair_rejects_indefinite():
    with pytest.raises(ContractError):
        psd_repair([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(ContractError):
        psd_repair([[1.0, 0.0, 0.0]])


def test_psd_root(rng):
    S = random_psd(rng, 4, rank=2)
    A = psd_root(S)
    assert A.shape == (4, 2)
    assert np.allclose(A @ A.T, S)
    assert psd_root(np.zeros((2, 2))).shape == (2, 0)


def test_row_reduce_gives_rref(rng):
    M = rng.standard_normal((2, 4))
    M = np.vstack([M, M[0] + 2 * M[1]])
    red = row_reduce(M)
    assert red.rank == 2
    assert np.allclose(red.S @ M, red.R, atol=1e-10)
    assert numerical_rank(red.S) == 3
    assert np.allclose(red.R[2], 0.0)
    for i, c in enumerate(red.pivot_cols):
        col = np.zeros(3)
        col[i] = 1.0
        assert np.allclose(red.R[:, c], col)


def test_rref_is_unique_under_row_operations(rng):
    M = rng.standard_normal((3, 5))
    G = rng.standard_normal((3, 3))
    R1, p1, _ = rref(M)
    R2, p2, _ = rref(G @ M)
    assert p1 == p2
    assert np.allclose(R1, R2, atol=1e-9)


def test_rref_is_idempotent(rng):
    for _ in range(50):
        rows, cols = (int(v) for v in rng.integers(1, 7, size=2))
        inner = int(rng.integers(1, min(rows, cols) + 1))
        M = rng.standard_normal((rows, inner)) @ rng.standard_normal((inner, cols))
        R, pivots, rank = rref(M)
        again, pivots_again, rank_again = rref(R)
        assert (pivots_again, rank_again) == (pivots, rank)
        assert np.allclose(again, R, atol=1e-9)


def test_rref_of_zero_and_empty():
    red = row_reduce(np.zeros((2, 3)))
    assert red.rank == 0 and red.pivot_cols == []
    assert row_reduce(np.zeros((0, 2))).rank == 0


def test_affine_subspace_membership():
    line = AffineSubspace.spanned([1.0, 0.0], [[1.0], [1.0]])
    assert subspace_contains(line, [3.0, 2.0])
    assert not subspace_contains(line, [3.0, 3.0])
    with pytest.raises(ContractError):
        subspace_contains(line, [1.0])


def test_affine_subspace_min_norm_point():
    line = AffineSubspace.spanned([1.0, 0.0], [[1.0], [1.0]])
    x0 = line.min_norm_point()
    assert subspace_contains(line, x0)
    assert np.allclose(x0, [0.5, -0.5])


def test_subspace_includes():
    plane = AffineSubspace.full(3)
    line = AffineSubspace.spanned([0.0, 1.0, 0.0], [[1.0], [0.0], [0.0]])
    point = AffineSubspace([2.0, 1.0, 0.0], np.zeros((3, 0)))
    assert subspace_includes(plane, line)
    assert not subspace_includes(line, plane)
    assert subspace_includes(line, point)


def test_membership_ignores_the_choice_of_basis(rng):
    for _ in range(30):
        n = int(rng.integers(2, 6))
        k = int(rng.integers(1, n))
        point = rng.standard_normal(n)
        directions = rng.standard_normal((n, k))
        S = AffineSubspace.spanned(point, directions)
        Q, _ = np.linalg.qr(rng.standard_normal((k, k)))
        rotated = AffineSubspace(point, S.basis @ Q)
        # a different spanning set of the same directions, orthonormalised afresh
        mixed = AffineSubspace.spanned(point + directions @ rng.standard_normal(k), directions @ rng.standard_normal((k, k)))
        inside = point + directions @ rng.standard_normal(k)
        outside = inside + null_basis(directions.T) @ rng.standard_normal(n - k)
        for T in (S, rotated, mixed):
            assert subspace_contains(T, T.point)
            assert subspace_contains(T, inside)
            assert not subspace_contains(T, outside)


def test_orthonormal_basis_is_required():
    with pytest.raises(ContractError):
        AffineSubspace([0.0, 0.0], [[2.0], [0.0]])


def test_orthogonal_equivalent(rng):
    A = rng.standard_normal((3, 3))
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    assert orthogonal_equivalent(A, A @ Q)
    assert not orthogonal_equivalent(A, 2 * A)
    assert orthogonal_equivalent([[1.0, 1.0]], [[np.sqrt(2.0), 0.0]])
    assert not orthogonal_equivalent([[1.0, 1.0]], [[1.0, 0.0]])


def test_tolerances_from_environment(monkeypatch):
    monkeypatch.setenv("GAUSS_TOL", "1e-6")
    get_tolerances.cache_clear()
    assert get_tolerances().support == pytest.approx(1e-6)
    monkeypatch.setenv("GAUSS_TOL", "abc")
    get_tolerances.cache_clear()
    with pytest.raises(ConfigError):
        get_tolerances()
    monkeypatch.setenv("GAUSS_TOL", "-1")
    get_tolerances.cache_clear()
    with pytest.raises(ConfigError):
        get_tolerances()
