# gausslang/cond.py
"""
Conditioning on top of Gauss.

A morphism X ~> Y is a triple (K, f, o): a generative map f : X -> Y ⊗ K and a
deterministic observation o on the K condition wires. Two morphisms are
compared through canonical records: the normal form of their condition
(A x =:= N(c, S) with A in reduced row echelon form) plus the posterior map,
restricted to the region W where the condition can succeed.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from .config import get_tolerances
from .errors import ContractError
from .gauss import (
    Failure,
    GaussMap,
    GaussState,
    abs_cont,
    affine,
    compose,
    condition_dist,
    constant,
    copy,
    identity,
    is_failure,
    maps_close,
    marginal,
    parameterized_conditional,
    swap,
    tensor,
)
from .linalg import (
    AffineSubspace,
    Matrix,
    Vector,
    allclose,
    as_vector,
    null_basis,
    pinv,
    row_reduce,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CondMorphism:
    dom: int
    cod: int
    k: int
    f: GaussMap
    o: Vector

    def __post_init__(self):
        if self.f.dom != self.dom:
            raise ContractError(f"generative part has domain {self.f.dom}, expected {self.dom}")
        if self.f.cod != self.cod + self.k:
            raise ContractError(f"generative part has codomain {self.f.cod}, expected {self.cod} + {self.k}")
        object.__setattr__(self, "o", as_vector(self.o, self.k, name="observation"))

    @classmethod
    def build(cls, f: GaussMap, cod: int, o) -> "CondMorphism":
        o = as_vector(o, name="observation")
        return cls(f.dom, cod, o.shape[0], f, o)

    @property
    def output_block(self) -> range:
        return range(self.cod)

    @property
    def condition_block(self) -> range:
        return range(self.cod, self.cod + self.k)

    def __repr__(self) -> str:
        return f"CondMorphism({self.dom} ~> {self.cod}, k={self.k}, o={self.o.tolist()})"


def J(f: GaussMap) -> CondMorphism:
    """Embed a Gauss map with no conditions."""
    return CondMorphism(f.dom, f.cod, 0, f, np.zeros(0))


def obs_identity(n: int) -> CondMorphism:
    return J(identity(n))


def condition_effect(o) -> CondMorphism:
    """(=:= o) : K ~> I."""
    o = as_vector(o, name="observation")
    return CondMorphism(o.shape[0], 0, o.shape[0], identity(o.shape[0]), o)


def obs_compose(g: CondMorphism, f: CondMorphism) -> CondMorphism:
    """(K' ⊗ K, (f' ⊗ id_K) f, o' ⊗ o) for g = (K', f', o') after f = (K, f, o)."""
    if g.dom != f.cod:
        raise ContractError(f"cannot compose: dom(g)={g.dom} but cod(f)={f.cod}")
    h = compose(tensor(g.f, identity(f.k)), f.f)
    return CondMorphism(f.dom, g.cod, g.k + f.k, h, np.concatenate([g.o, f.o]))


def obs_tensor(f: CondMorphism, g: CondMorphism) -> CondMorphism:
    """
    f ⊗ g : X ⊗ X' ~> Y ⊗ Y'. The generative parts are tensored and the
    condition wires rerouted behind the outputs: Y ⊗ Y' ⊗ K_f ⊗ K_g.
    """
    joint = tensor(f.f, g.f)  # Y ⊗ K_f ⊗ Y' ⊗ K_g
    reroute = tensor(tensor(identity(f.cod), swap(f.k, g.cod)), identity(g.k))
    return CondMorphism(
        f.dom + g.dom,
        f.cod + g.cod,
        f.k + g.k,
        compose(reroute, joint),
        np.concatenate([f.o, g.o]),
    )


def obs_tupling(f: CondMorphism, g: CondMorphism) -> CondMorphism:
    """<f, g> = (f ⊗ g) ∘ copy."""
    if f.dom != g.dom:
        raise ContractError(f"cannot pair morphisms with domains {f.dom} and {g.dom}")
    return obs_compose(obs_tensor(f, g), J(copy(f.dom)))


# -------------------------------------------------------------------
# Closed states
# -------------------------------------------------------------------
def state_normalize(s: CondMorphism) -> Union[GaussState, Failure]:
    """(K, psi, o) |-> psi|_K(o), or ⊥ when o is off the support of psi_K."""
    if s.dom != 0:
        raise ContractError(f"state_normalize needs a state, got domain {s.dom}")
    psi = s.f
    observed = marginal(psi, s.condition_block)
    if not abs_cont(constant(s.o), observed):
        logger.debug(f"observation {s.o.tolist()} not in the support of the condition wires")
        return Failure("observation outside the support of the condition wires")
    return condition_dist(psi, s.condition_block, s.o)


# -------------------------------------------------------------------
# Effects
# -------------------------------------------------------------------
class Status(str, Enum):
    BOT = "bot"
    CONSTRAINT = "constraint"


@dataclass(frozen=True, eq=False)
class EffectNormalForm:
    """A x =:= N(c, S) over R^dom with A in RREF and no zero rows, or ⊥."""

    dom: int
    status: Status
    A: Matrix
    c: Vector
    S: Matrix

    @classmethod
    def bot(cls, dom: int) -> "EffectNormalForm":
        return cls(dom, Status.BOT, np.zeros((0, dom)), np.zeros(0), np.zeros((0, 0)))

    @property
    def is_bot(self) -> bool:
        return self.status is Status.BOT

    @property
    def rank(self) -> int:
        return self.A.shape[0]

    def close_to(self, other: "EffectNormalForm", tol: Optional[float] = None) -> bool:
        tol = get_tolerances().equal if tol is None else tol
        if self.dom != other.dom or self.status is not other.status:
            return False
        if self.is_bot:
            return True
        return allclose(self.A, other.A, tol) and allclose(self.c, other.c, tol) and allclose(self.S, other.S, tol)

    def __repr__(self) -> str:
        if self.is_bot:
            return f"EffectNormalForm(dom={self.dom}, ⊥)"
        return f"EffectNormalForm(A={self.A.tolist()}, c={self.c.tolist()}, S={self.S.tolist()})"


def reduce_constraint(A, c, Sigma) -> EffectNormalForm:
    """
    Normal form of the condition A x =:= N(c, Sigma).

    An invertible S brings A to reduced row echelon form. The rows with no
    x-coefficients become closed conditions 0 =:= (S eta)_bottom; they are
    resolved by conditioning the transformed noise, which either fails or
    updates the remaining rows.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    red = row_reduce(A)
    r = red.rank
    S = red.S
    eta = GaussState.of(S @ np.asarray(c, dtype=float), S @ np.asarray(Sigma, dtype=float) @ S.T)
    post = condition_dist(eta, range(r, m), np.zeros(m - r))
    if is_failure(post):
        logger.debug(f"closed part of a {m}-row condition is inconsistent")
        return EffectNormalForm.bot(n)
    logger.debug(f"condition of {m} rows reduced to rank {r}")
    return EffectNormalForm(n, Status.CONSTRAINT, red.R[:r], post.mean, post.cov)


def effect_normal_form(e: CondMorphism) -> EffectNormalForm:
    """
    For e = (K, f, o) : n ~> 0 with f(x) = F x + g + N(Psi) the condition
    reads F x =:= N(o - g, Psi).
    """
    if e.cod != 0:
        raise ContractError(f"effect_normal_form needs codomain 0, got {e.cod}")
    return reduce_constraint(e.f.A, e.o - e.f.b, e.f.Sigma)


def success_region(nf: EffectNormalForm) -> Optional[AffineSubspace]:
    """W = {x : A x - c in col(S)}; None for ⊥."""
    if nf.is_bot:
        return None
    Q = null_basis(nf.S)  # orthonormal basis of col(S)^perp
    M = Q.T @ nf.A
    rhs = Q.T @ nf.c
    x0 = pinv(M) @ rhs
    return AffineSubspace(x0, null_basis(M))


# -------------------------------------------------------------------
# Canonical records and equivalence
# -------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CanonicalRecord:
    effect: EffectNormalForm
    posterior: Optional[GaussMap]
    region: Optional[AffineSubspace]

    @property
    def is_bot(self) -> bool:
        return self.effect.is_bot


def _evaluate_condition_at(m: CondMorphism) -> GaussMap:
    """x |-> f|_K(o, x) : X -> Y."""
    conditional = parameterized_conditional(m.f, m.condition_block)  # K ⊗ X -> Y
    insert = np.vstack([np.zeros((m.k, m.dom)), np.eye(m.dom)])
    plug = affine(insert, np.concatenate([m.o, np.zeros(m.dom)]))
    return compose(conditional, plug)


def canonicalize(m: CondMorphism) -> CanonicalRecord:
    effect = effect_normal_form(CondMorphism(m.dom, 0, m.k, marginal(m.f, m.condition_block), m.o))
    if effect.is_bot:
        return CanonicalRecord(effect, None, None)
    region = success_region(effect)
    post = _evaluate_condition_at(m)
    # off W the posterior is unobservable: pin it to W's min-norm point and directions
    x0 = region.min_norm_point()
    A = post.A @ region.projector()
    b = post.A @ x0 + post.b
    return CanonicalRecord(effect, GaussMap.make(A.reshape(m.cod, m.dom), b, post.Sigma), region)


def records_close(r1: CanonicalRecord, r2: CanonicalRecord, tol: Optional[float] = None) -> bool:
    if not r1.effect.close_to(r2.effect, tol):
        return False
    if r1.is_bot:
        return True
    return maps_close(r1.posterior, r2.posterior, tol)


def equiv(m1: CondMorphism, m2: CondMorphism, tol: Optional[float] = None) -> bool:
    if (m1.dom, m1.cod) != (m2.dom, m2.cod):
        raise ContractError(f"cannot compare {m1.dom} ~> {m1.cod} with {m2.dom} ~> {m2.cod}")
    return records_close(canonicalize(m1), canonicalize(m2), tol)


def probe(m: CondMorphism, psi: GaussState) -> Union[GaussState, Failure]:
    """Run m against a prior psi : I -> A ⊗ X and normalise: (id_A ⊗ m) psi."""
    extra = psi.dim - m.dom
    if extra < 0:
        raise ContractError(f"prior of dimension {psi.dim} is too small for domain {m.dom}")
    return state_normalize(obs_compose(obs_tensor(obs_identity(extra), m), J(psi)))
