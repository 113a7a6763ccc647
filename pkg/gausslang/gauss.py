# gausslang/gauss.py
"""
The Markov category Gauss.

A morphism m -> n is a triple (A, b, Sigma) standing for the stochastic map
x |-> A x + b + N(Sigma). States (distributions) are the morphisms out of 0.
"""
import logging
from dataclasses import InitVar, dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .config import get_tolerances
from .errors import ContractError
from .linalg import (
    AffineSubspace,
    Matrix,
    Vector,
    allclose,
    as_matrix,
    as_vector,
    col_basis,
    pinv,
    psd_repair,
    subspace_contains,
    subspace_includes,
)

logger = logging.getLogger(__name__)

Block = Union[range, slice, Sequence[int]]


@dataclass(frozen=True, eq=False)
class GaussMap:
    A: Matrix
    b: Vector
    Sigma: Matrix
    # set when Sigma is assembled from covariances that were already checked
    trusted: InitVar[bool] = False

    def __post_init__(self, trusted: bool = False):
        A = as_matrix(self.A, name="A")
        cod = A.shape[0]
        Sigma = as_matrix(self.Sigma, cod, cod, name="Sigma")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", as_vector(self.b, cod, name="b"))
        object.__setattr__(self, "Sigma", Sigma if trusted else psd_repair(Sigma))

    @property
    def dom(self) -> int:
        return self.A.shape[1]

    @property
    def cod(self) -> int:
        return self.A.shape[0]

    @property
    def is_state(self) -> bool:
        return self.dom == 0

    @staticmethod
    def make(A, b, Sigma, trusted: bool = False) -> "GaussMap":
        """Build a map, returning a GaussState when the domain is 0."""
        A = np.asarray(A, dtype=float)
        if A.ndim == 2 and A.shape[1] == 0:
            return GaussState(A, b, Sigma, trusted)
        return GaussMap(A, b, Sigma, trusted)

    def __call__(self, x) -> "GaussState":
        """Evaluate at a deterministic input."""
        return compose(self, constant(x))

    def __repr__(self) -> str:
        return f"GaussMap(dom={self.dom}, cod={self.cod}, A={self.A.tolist()}, b={self.b.tolist()}, Sigma={self.Sigma.tolist()})"


class GaussState(GaussMap):
    """N(mean, cov) on R^dim: a GaussMap with dom = 0."""

    def __post_init__(self, trusted: bool = False):
        super().__post_init__(trusted)
        if self.dom != 0:
            raise ContractError(f"a state has domain 0, got {self.dom}")

    @classmethod
    def of(cls, mean, cov) -> "GaussState":
        mean = as_vector(mean, name="mean")
        return cls(np.zeros((mean.shape[0], 0)), mean, cov)

    @property
    def dim(self) -> int:
        return self.cod

    @property
    def mean(self) -> Vector:
        return self.b

    @property
    def cov(self) -> Matrix:
        return self.Sigma

    def __repr__(self) -> str:
        return f"N({self.mean.tolist()}, {self.cov.tolist()})"


class Failure:
    """The failed state ⊥. All failures are equal; the reason is for logs only."""

    __slots__ = ("reason",)

    def __init__(self, reason: str = "observation outside the support"):
        self.reason = reason

    def __eq__(self, other) -> bool:
        return isinstance(other, Failure)

    def __hash__(self) -> int:
        return hash(Failure)

    def __repr__(self) -> str:
        return "⊥"


def is_failure(x) -> bool:
    return isinstance(x, Failure)


# -------------------------------------------------------------------
# Index blocks
# -------------------------------------------------------------------
def block_indices(block: Block, n: int) -> list[int]:
    if isinstance(block, slice):
        idx = list(range(n))[block]
    else:
        idx = [int(i) for i in block]
    if any(i < 0 or i >= n for i in idx):
        raise ContractError(f"block {idx} out of range for dimension {n}")
    if len(set(idx)) != len(idx):
        raise ContractError(f"block {idx} repeats an index")
    return idx


def complement(idx: Sequence[int], n: int) -> list[int]:
    chosen = set(idx)
    return [i for i in range(n) if i not in chosen]


# -------------------------------------------------------------------
# Composition
# -------------------------------------------------------------------
def compose(g: GaussMap, f: GaussMap) -> GaussMap:
    """g after f: (AC, Ad + b, A Xi A^T + Sigma)."""
    if g.dom != f.cod:
        raise ContractError(f"cannot compose: dom(g)={g.dom} but cod(f)={f.cod}")
    A = g.A @ f.A
    b = g.A @ f.b + g.b
    Sigma = g.A @ f.Sigma @ g.A.T + g.Sigma
    return GaussMap.make(A.reshape(g.cod, f.dom), b, Sigma)


def _block_diag(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    out = np.zeros((X.shape[0] + Y.shape[0], X.shape[1] + Y.shape[1]))
    out[: X.shape[0], : X.shape[1]] = X
    out[X.shape[0]:, X.shape[1]:] = Y
    return out


def tensor(f: GaussMap, g: GaussMap) -> GaussMap:
    return GaussMap.make(
        _block_diag(f.A, g.A),
        np.concatenate([f.b, g.b]),
        _block_diag(f.Sigma, g.Sigma),
        trusted=True,
    )


def tupling(f: GaussMap, g: GaussMap) -> GaussMap:
    """<f, g> = (f ⊗ g) ∘ copy."""
    if f.dom != g.dom:
        raise ContractError(f"cannot pair maps with domains {f.dom} and {g.dom}")
    return compose(tensor(f, g), copy(f.dom))


# -------------------------------------------------------------------
# Structure: deterministic maps
# -------------------------------------------------------------------
def affine(A, b=None) -> GaussMap:
    A = as_matrix(A, name="A")
    b = np.zeros(A.shape[0]) if b is None else b
    return GaussMap.make(A, b, np.zeros((A.shape[0], A.shape[0])))


def identity(n: int) -> GaussMap:
    return affine(np.eye(n))


def copy(n: int) -> GaussMap:
    return affine(np.vstack([np.eye(n), np.eye(n)]))


def delete(n: int) -> GaussMap:
    return affine(np.zeros((0, n)))


def select(n: int, block: Block) -> GaussMap:
    """Deterministic projection R^n -> R^|block| onto the listed coordinates."""
    idx = block_indices(block, n)
    return affine(np.eye(n)[idx].reshape(len(idx), n))


def permutation(perm: Sequence[int]) -> GaussMap:
    """Output coordinate i is input coordinate perm[i]."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ContractError(f"{list(perm)} is not a permutation")
    return select(n, perm)


def swap(m: int, n: int) -> GaussMap:
    """R^m ⊗ R^n -> R^n ⊗ R^m."""
    return permutation(list(range(m, m + n)) + list(range(m)))


def constant(c) -> "GaussState":
    c = as_vector(c, name="constant")
    return GaussState.of(c, np.zeros((c.shape[0], c.shape[0])))


def standard_normal(n: int = 1) -> "GaussState":
    return GaussState.of(np.zeros(n), np.eye(n))


_STRUCTURAL: dict[str, Callable[..., GaussMap]] = {
    "identity": identity,
    "copy": copy,
    "delete": delete,
    "swap": swap,
    "affine": affine,
    "permutation": permutation,
}


def structural(kind: str, *args) -> GaussMap:
    try:
        build = _STRUCTURAL[kind]
    except KeyError:
        raise ContractError(f"unknown structural morphism {kind!r}; expected one of {sorted(_STRUCTURAL)}")
    return build(*args)


def is_deterministic(f: GaussMap) -> bool:
    return bool(np.all(np.abs(f.Sigma) <= get_tolerances().equal))


# -------------------------------------------------------------------
# Marginals, supports, conditioning
# -------------------------------------------------------------------
def marginal(f: GaussMap, block: Block) -> GaussMap:
    idx = block_indices(block, f.cod)
    A = f.A[idx].reshape(len(idx), f.dom)
    return GaussMap.make(A, f.b[idx], f.Sigma[np.ix_(idx, idx)])


def pushforward(f: GaussMap, psi: GaussState) -> GaussState:
    return compose(f, psi)


def support(psi: GaussState) -> AffineSubspace:
    """mean + col(cov)."""
    return AffineSubspace(psi.mean, col_basis(psi.cov))


def abs_cont(mu: GaussState, nu: GaussState) -> bool:
    """mu << nu, i.e. the support of mu lies inside the support of nu."""
    if mu.dim != nu.dim:
        raise ContractError(f"states of dimension {mu.dim} and {nu.dim}")
    return subspace_includes(support(nu), support(mu))


def _scale(Sigma: np.ndarray) -> float:
    return float(np.max(np.diag(Sigma))) if Sigma.size else 0.0


def condition_dist(psi: GaussState, obs_block: Block, a) -> Union[GaussState, Failure]:
    """
    Posterior of the remaining coordinates given psi[obs_block] = a:
    mu' = mu1 + S12 S22^+ (a - mu2), S' = S11 - S12 S22^+ S21.
    """
    obs = block_indices(obs_block, psi.dim)
    a = as_vector(a, len(obs), name="observation")
    rest = complement(obs, psi.dim)
    observed = marginal(psi, obs)
    Sigma = psi.cov
    # ranks of the observed block are judged against the whole covariance
    scale = _scale(Sigma)
    if not subspace_contains(AffineSubspace(observed.mean, col_basis(observed.cov, scale)), a):
        logger.debug(f"observation {a.tolist()} is off the support of the observed block")
        return Failure(f"observation {a.tolist()} lies outside the support")
    S12 = Sigma[np.ix_(rest, obs)]
    K = S12 @ pinv(Sigma[np.ix_(obs, obs)], scale)
    mean = psi.mean[rest] + K @ (a - observed.mean)
    cov = Sigma[np.ix_(rest, rest)] - K @ S12.T
    return GaussState.of(mean, cov)


def parameterized_conditional(f: GaussMap, block: Block) -> GaussMap:
    """
    For f : A -> X ⊗ Y (X = the coordinates in block, Y the rest) return
    f|_X : X ⊗ A -> Y, the law of Y given X and the input.
    """
    x_idx = block_indices(block, f.cod)
    y_idx = complement(x_idx, f.cod)
    Psi = f.Sigma
    F_x, F_y = f.A[x_idx].reshape(len(x_idx), f.dom), f.A[y_idx].reshape(len(y_idx), f.dom)
    K = Psi[np.ix_(y_idx, x_idx)] @ pinv(Psi[np.ix_(x_idx, x_idx)], _scale(Psi))
    A = np.hstack([K, F_y - K @ F_x]).reshape(len(y_idx), len(x_idx) + f.dom)
    b = f.b[y_idx] - K @ f.b[x_idx]
    Sigma = Psi[np.ix_(y_idx, y_idx)] - K @ Psi[np.ix_(x_idx, y_idx)]
    return GaussMap.make(A, b, Sigma)


def observe_posterior(prior: GaussState, obs: GaussState) -> Union[GaussState, Failure]:
    """X | (X = Y) for independent X ~ prior, Y ~ obs."""
    if prior.dim != obs.dim:
        raise ContractError(f"states of dimension {prior.dim} and {obs.dim}")
    total = prior.cov + obs.cov
    gap = obs.mean - prior.mean
    if not subspace_contains(support(GaussState.of(np.zeros(prior.dim), total)), gap):
        return Failure("observed value outside the joint support")
    G = prior.cov @ pinv(total)
    return GaussState.of(prior.mean + G @ gap, prior.cov - G @ prior.cov)


# -------------------------------------------------------------------
# Comparison
# -------------------------------------------------------------------
def maps_close(f: GaussMap, g: GaussMap, tol: Optional[float] = None) -> bool:
    tol = get_tolerances().equal if tol is None else tol
    if (f.dom, f.cod) != (g.dom, g.cod):
        return False
    return allclose(f.A, g.A, tol) and allclose(f.b, g.b, tol) and allclose(f.Sigma, g.Sigma, tol)


def states_close(mu, nu, tol: Optional[float] = None) -> bool:
    """Equal up to tol, treating ⊥ as equal only to ⊥."""
    if is_failure(mu) or is_failure(nu):
        return is_failure(mu) and is_failure(nu)
    return maps_close(mu, nu, tol)
