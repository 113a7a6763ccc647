# gausslang/linalg.py
"""
Dense real linear algebra for small Gaussian problems.

Every rank, support and pivot decision goes through one relative threshold:
a singular value s counts as zero iff s <= max(rows, cols) * s_max * tol.rank.
Arrays returned from this module are read-only numpy float arrays.
"""
import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import Tolerances, get_tolerances
from .errors import ContractError, NumericalError

logger = logging.getLogger(__name__)

Matrix = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]
ArrayLike = Union[npt.ArrayLike, Sequence[Sequence[float]], Sequence[float]]

ORTHONORMAL_TOL = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def as_matrix(M: ArrayLike, rows: Optional[int] = None, cols: Optional[int] = None, name: str = "matrix") -> Matrix:
    arr = np.array(M, dtype=float)
    if arr.ndim != 2:
        raise ContractError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if rows is not None and arr.shape[0] != rows:
        raise ContractError(f"{name} must have {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise ContractError(f"{name} must have {cols} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    return _frozen(arr)


def as_vector(v: ArrayLike, dim: Optional[int] = None, name: str = "vector") -> Vector:
    arr = np.array(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ContractError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ContractError(f"{name} must have dimension {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} has non-finite entries")
    return _frozen(arr)


def allclose(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if np.shape(a) != np.shape(b):
        return False
    return bool(np.allclose(a, b, rtol=tol, atol=tol))


# -------------------------------------------------------------------
# SVD and rank
# -------------------------------------------------------------------
def svd(M: ArrayLike) -> tuple[Matrix, Vector, Matrix]:
    """Full SVD M = U diag(s) V^T; returns (U, s, V) with s nonincreasing."""
    M = as_matrix(M)
    rows, cols = M.shape
    if M.size == 0:
        return _frozen(np.eye(rows)), _frozen(np.zeros(0)), _frozen(np.eye(cols))
    try:
        U, s, Vt = scipy.linalg.svd(M, full_matrices=True, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        logger.warning(f"gesdd did not converge on a {rows}x{cols} matrix; retrying with gesvd")
        try:
            U, s, Vt = scipy.linalg.svd(M, full_matrices=True, lapack_driver="gesvd")
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"SVD did not converge on a {rows}x{cols} matrix") from e
    return _frozen(U), _frozen(s), _frozen(Vt.T.copy())


def rank_cutoff(shape: tuple[int, int], s_max: float, tol: Optional[Tolerances] = None) -> float:
    tol = tol or get_tolerances()
    return max(shape) * s_max * tol.rank


def _rank_from(s: Vector, shape: tuple[int, int], scale: Optional[float] = None) -> int:
    if s.size == 0:
        return 0
    return int(np.sum(s > rank_cutoff(shape, max(float(s[0]), scale or 0.0))))


def numerical_rank(M: ArrayLike) -> int:
    M = as_matrix(M)
    _, s, _ = svd(M)
    return _rank_from(s, M.shape)


def pinv(M: ArrayLike, scale: Optional[float] = None) -> Matrix:
    """
    Moore-Penrose pseudoinverse through the SVD at the rank threshold.

    When M is a block of a larger matrix, `scale` is that matrix's largest
    singular value, and the threshold is taken against it instead.
    """
    M = as_matrix(M)
    U, s, V = svd(M)
    r = _rank_from(s, M.shape, scale)
    P = (V[:, :r] / s[:r]) @ U[:, :r].T
    return _frozen(np.asarray(P, dtype=float).reshape(M.shape[1], M.shape[0]))


def col_basis(M: ArrayLike, scale: Optional[float] = None) -> Matrix:
    """Orthonormal basis of the column space (rows x rank); `scale` as for pinv."""
    M = as_matrix(M)
    U, s, _ = svd(M)
    r = _rank_from(s, M.shape, scale)
    return _frozen(U[:, :r].copy())


def null_basis(M: ArrayLike) -> Matrix:
    """Orthonormal basis of the null space (cols x (cols - rank))."""
    M = as_matrix(M)
    _, s, V = svd(M)
    r = _rank_from(s, M.shape)
    return _frozen(V[:, r:].copy())


def base_change(A: ArrayLike) -> tuple[Matrix, Matrix, int]:
    """
    Invertible S and orthogonal T with S A T^-1 = [[I_r, 0], [0, 0]].
    T = V^T from the SVD; S rescales the first r rows of U^T.
    """
    A = as_matrix(A)
    U, s, V = svd(A)
    r = _rank_from(s, A.shape)
    scale = np.ones(A.shape[0])
    scale[:r] = 1.0 / s[:r]
    S = scale[:, None] * U.T
    return _frozen(S), _frozen(V.T.copy()), r


# -------------------------------------------------------------------
# PSD matrices
# -------------------------------------------------------------------
def psd_repair(S: ArrayLike, name: str = "covariance") -> Matrix:
    """Symmetrize and clamp slightly negative eigenvalues; reject genuinely indefinite input."""
    S = np.array(as_matrix(S, name=name))
    n, m = S.shape
    if n != m:
        raise ContractError(f"{name} must be square, got {S.shape}")
    S = (S + S.T) / 2.0
    if n == 0:
        return _frozen(S)
    w, V = scipy.linalg.eigh(S)
    scale = max(1.0, float(np.max(np.abs(w))))
    tol = get_tolerances()
    if w[0] < -tol.psd * scale:
        raise ContractError(f"{name} is not positive semidefinite (eigenvalue {w[0]:.3e})")
    if w[0] < 0.0:
        logger.debug(f"clamping eigenvalue {w[0]:.3e} of {name}")
        S = (V * np.clip(w, 0.0, None)) @ V.T
        S = (S + S.T) / 2.0
    return _frozen(S)


def psd_root(S: ArrayLike) -> Matrix:
    """Some A (n x rank) with A A^T = S, from the symmetric eigendecomposition."""
    S = psd_repair(S)
    n = S.shape[0]
    if n == 0:
        return _frozen(np.zeros((0, 0)))
    w, V = scipy.linalg.eigh(S)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    keep = w > rank_cutoff(S.shape, max(float(w[0]), 0.0))
    return _frozen(V[:, keep] * np.sqrt(w[keep]))


# -------------------------------------------------------------------
# Row reduction
# -------------------------------------------------------------------
class RowReduction(NamedTuple):
    R: Matrix
    pivot_cols: list[int]
    rank: int
    S: Matrix  # invertible, S @ M == R


def row_reduce(M: ArrayLike) -> RowReduction:
    """
    Gauss-Jordan elimination with partial (max-abs) pivoting on [M | I].
    Entries at or below the rank cutoff count as zero.
    """
    M = as_matrix(M)
    rows, cols = M.shape
    R = np.array(M)
    S = np.eye(rows)
    if M.size == 0:
        return RowReduction(_frozen(R), [], 0, _frozen(S))
    cutoff = rank_cutoff(M.shape, float(np.linalg.norm(M, 2)))
    pivots: list[int] = []
    row = 0
    for col in range(cols):
        if row == rows:
            break
        p = row + int(np.argmax(np.abs(R[row:, col])))
        if abs(R[p, col]) <= cutoff:
            R[row:, col] = 0.0
            continue
        if p != row:
            R[[row, p]] = R[[p, row]]
            S[[row, p]] = S[[p, row]]
        piv = R[row, col]
        R[row] /= piv
        S[row] /= piv
        for i in range(rows):
            if i != row and R[i, col] != 0.0:
                f = R[i, col]
                R[i] -= f * R[row]
                S[i] -= f * S[row]
        R[:, col] = 0.0
        R[row, col] = 1.0
        pivots.append(col)
        row += 1
    R[row:] = 0.0
    return RowReduction(_frozen(R), pivots, row, _frozen(S))


def rref(M: ArrayLike) -> tuple[Matrix, list[int], int]:
    red = row_reduce(M)
    return red.R, red.pivot_cols, red.rank


# -------------------------------------------------------------------
# Affine subspaces
# -------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """point + span(basis); basis columns are orthonormal."""

    point: Vector
    basis: Matrix

    def __post_init__(self):
        point = as_vector(self.point, name="point")
        basis = as_matrix(self.basis, rows=point.shape[0], name="basis")
        if basis.shape[1] > point.shape[0]:
            raise ContractError("basis has more columns than the ambient dimension")
        gram = basis.T @ basis
        if basis.shape[1] and np.max(np.abs(gram - np.eye(basis.shape[1]))) > ORTHONORMAL_TOL:
            raise ContractError("basis columns are not orthonormal")
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def spanned(cls, point: ArrayLike, directions: ArrayLike) -> "AffineSubspace":
        point = as_vector(point, name="point")
        directions = as_matrix(directions, rows=point.shape[0], name="directions")
        return cls(point, col_basis(directions))

    @classmethod
    def full(cls, n: int) -> "AffineSubspace":
        return cls(np.zeros(n), np.eye(n))

    @property
    def ambient_dim(self) -> int:
        return self.point.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def residual(self, v: Vector) -> Vector:
        d = np.asarray(v, dtype=float) - self.point
        return d - self.basis @ (self.basis.T @ d)

    def projector(self) -> Matrix:
        return _frozen(self.basis @ self.basis.T)

    def min_norm_point(self) -> Vector:
        return _frozen(self.point - self.basis @ (self.basis.T @ self.point))

    def __repr__(self) -> str:
        return f"AffineSubspace(ambient={self.ambient_dim}, dim={self.dim}, point={self.point.tolist()})"


def subspace_contains(S: AffineSubspace, v: ArrayLike) -> bool:
    v = as_vector(v, name="v")
    if v.shape[0] != S.ambient_dim:
        raise ContractError(f"vector of dimension {v.shape[0]} against subspace of R^{S.ambient_dim}")
    tol = get_tolerances()
    return bool(np.linalg.norm(S.residual(v)) <= tol.support * (1.0 + np.linalg.norm(v)))


def subspace_includes(S: AffineSubspace, T: AffineSubspace) -> bool:
    """True iff T is contained in S."""
    if S.ambient_dim != T.ambient_dim:
        raise ContractError("subspaces live in different ambient spaces")
    if not subspace_contains(S, T.point):
        return False
    if T.dim == 0:
        return True
    leftover = T.basis - S.basis @ (S.basis.T @ T.basis)
    return bool(np.max(np.linalg.norm(leftover, axis=0)) <= get_tolerances().support)


def orthogonal_equivalent(A: ArrayLike, B: ArrayLike) -> bool:
    """A = B U for some orthogonal U, decided through A A^T = B B^T."""
    A = as_matrix(A, name="A")
    B = as_matrix(B, name="B")
    if A.shape[0] != B.shape[0]:
        raise ContractError(f"row counts differ: {A.shape[0]} vs {B.shape[0]}")
    AA = A @ A.T
    BB = B @ B.T
    return bool(np.linalg.norm(AA - BB) <= 1e-8 * (1.0 + np.linalg.norm(AA)))
