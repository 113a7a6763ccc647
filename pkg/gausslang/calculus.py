# gausslang/calculus.py
"""
The core fragment and its equational theory.

Core terms over context variables Γ = x1..xn:

    t ::= ν z. t  |  (a =:= b); t  |  r[a1, ..., ak]  |  ⊥

with a, b affine expressions over Γ and the ν-bound latents. Surface
programs flatten into this fragment by substituting let-bound values
hereditarily. Closed terms normalise to ν z. r[A z + c] or ⊥; terms of unit
type normalise to an effect A x =:= N(c, B Bᵀ) with A in reduced row
echelon form.
"""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from .cond import EffectNormalForm, Status
from .config import get_tolerances
from .errors import ContractError
from .gauss import Failure, GaussState
from .lang.syntax import (
    WILDCARD,
    Add,
    Cond,
    Const,
    Let,
    LetPair,
    Normal,
    Pair,
    Scale,
    Term,
    Unit,
    Var,
    trampoline,
    tuple_term,
)
from .linalg import Matrix, Vector, numerical_rank, rank_cutoff, row_reduce, svd

logger = logging.getLogger(__name__)


# -------------------------------------------------------------------
# Affine expressions
# -------------------------------------------------------------------
@dataclass(frozen=True)
class Affine:
    """Σ coef·var + const, with terms sorted by name and no zero coefficients."""

    terms: tuple[tuple[str, float], ...] = ()
    const: float = 0.0

    @classmethod
    def of(cls, coefs: dict[str, float], const: float = 0.0) -> "Affine":
        return cls(tuple(sorted((v, float(c)) for v, c in coefs.items() if c != 0.0)), float(const))

    @classmethod
    def var(cls, name: str) -> "Affine":
        return cls(((name, 1.0),), 0.0)

    @classmethod
    def constant(cls, c: float) -> "Affine":
        return cls((), float(c))

    @property
    def coefs(self) -> dict[str, float]:
        return dict(self.terms)

    @property
    def free_vars(self) -> set[str]:
        return {v for v, _ in self.terms}

    @property
    def is_constant(self) -> bool:
        return not self.terms

    def coefficient(self, name: str) -> float:
        return self.coefs.get(name, 0.0)

    def __add__(self, other: "Affine") -> "Affine":
        coefs = self.coefs
        for v, c in other.terms:
            coefs[v] = coefs.get(v, 0.0) + c
        return Affine.of(coefs, self.const + other.const)

    def scale(self, alpha: float) -> "Affine":
        return Affine.of({v: alpha * c for v, c in self.terms}, alpha * self.const)

    def __sub__(self, other: "Affine") -> "Affine":
        return self + other.scale(-1.0)

    def substitute(self, mapping: dict[str, "Affine"]) -> "Affine":
        out = Affine.constant(self.const)
        for v, c in self.terms:
            out = out + (mapping[v].scale(c) if v in mapping else Affine(((v, c),)))
        return out

    def close_to(self, other: "Affine", tol: float) -> bool:
        a, b = self.coefs, other.coefs
        names = set(a) | set(b)
        return abs(self.const - other.const) <= tol and all(abs(a.get(v, 0.0) - b.get(v, 0.0)) <= tol for v in names)

    def row(self, names: Sequence[str]) -> Vector:
        coefs = self.coefs
        return np.array([coefs.get(v, 0.0) for v in names])

    def __str__(self) -> str:
        parts = []
        for v, c in self.terms:
            parts.append(v if c == 1.0 else f"{c:g}·{v}")
        if self.const != 0.0 or not parts:
            parts.append(f"{self.const:g}")
        return " + ".join(parts)


def affine_from_row(coefs: Sequence[float], names: Sequence[str], const: float = 0.0) -> Affine:
    return Affine.of(dict(zip(names, coefs)), const)


# -------------------------------------------------------------------
# Core terms
# -------------------------------------------------------------------
@dataclass(frozen=True)
class Nu:
    var: str
    body: "CoreTerm"


@dataclass(frozen=True)
class CondStmt:
    lhs: Affine
    rhs: Affine
    body: "CoreTerm"


@dataclass(frozen=True)
class Return:
    exprs: tuple[Affine, ...]


@dataclass(frozen=True)
class Bot:
    arity: int


CoreTerm = Union[Nu, CondStmt, Return, Bot]


def arity(t: CoreTerm) -> int:
    while isinstance(t, (Nu, CondStmt)):
        t = t.body
    return len(t.exprs) if isinstance(t, Return) else t.arity


def _spine(t: CoreTerm) -> tuple[list[Union[Nu, CondStmt]], CoreTerm]:
    """The ν / condition prefix of t and the r[...] or ⊥ it ends in."""
    prefix = []
    while isinstance(t, (Nu, CondStmt)):
        prefix.append(t)
        t = t.body
    return prefix, t


def _wrap(prefix: Sequence[Union[Nu, CondStmt]], tail: CoreTerm) -> CoreTerm:
    for node in reversed(prefix):
        tail = Nu(node.var, tail) if isinstance(node, Nu) else CondStmt(node.lhs, node.rhs, tail)
    return tail


def core_free_vars(t: CoreTerm) -> set[str]:
    prefix, tail = _spine(t)
    free = set().union(*(a.free_vars for a in tail.exprs)) if isinstance(tail, Return) else set()
    for node in reversed(prefix):
        if isinstance(node, Nu):
            free.discard(node.var)
        else:
            free |= node.lhs.free_vars | node.rhs.free_vars
    return free


def core_substitute(t: CoreTerm, mapping: dict[str, Affine]) -> CoreTerm:
    """Capture-avoiding only in the sense that binders shadow; latents are kept distinct by construction."""
    prefix, tail = _spine(t)
    out = []
    for node in prefix:
        if isinstance(node, Nu):
            mapping = {k: v for k, v in mapping.items() if k != node.var}
            if any(node.var in a.free_vars for a in mapping.values()):
                raise ContractError(f"substitution would capture latent {node.var!r}")
            out.append(node)
        else:
            out.append(CondStmt(node.lhs.substitute(mapping), node.rhs.substitute(mapping), node.body))
    if isinstance(tail, Return):
        tail = Return(tuple(a.substitute(mapping) for a in tail.exprs))
    return _wrap(out, tail)


def pretty_core(t: CoreTerm) -> str:
    prefix, tail = _spine(t)
    parts = [f"ν {n.var}. " if isinstance(n, Nu) else f"({n.lhs} =:= {n.rhs}); " for n in prefix]
    if isinstance(tail, Return):
        parts.append("r[" + ", ".join(str(a) for a in tail.exprs) + "]")
    else:
        parts.append("⊥")
    return "".join(parts)


# -------------------------------------------------------------------
# Surface -> core
# -------------------------------------------------------------------
# Value trees: an Affine for R, () for I, a 2-tuple for pairs.
ValueTree = Union[Affine, tuple]


def _flatten(v: ValueTree) -> list[Affine]:
    out: list[Affine] = []
    todo = [v]
    while todo:
        v = todo.pop()
        if isinstance(v, Affine):
            out.append(v)
        elif v != ():
            todo += [v[1], v[0]]
    return out


class CoreTranslator:
    """
    Evaluates a term to a value tree, emitting ν binders and conditions in
    evaluation order; the statements then wrap the final r[...].
    """

    def __init__(self, prefix: str = "z"):
        self._fresh = itertools.count(1)
        self.prefix = prefix
        self.statements: list[Union[str, tuple[Affine, Affine]]] = []

    def fresh(self) -> str:
        return f"{self.prefix}{next(self._fresh)}"

    def translate(self, e: Term, env: dict[str, ValueTree]):
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, Const):
            return Affine.constant(e.value)
        if isinstance(e, Unit):
            return ()
        if isinstance(e, Normal):
            z = self.fresh()
            self.statements.append(z)
            return Affine.var(z)
        if isinstance(e, Add):
            a = yield self.translate(e.left, env)
            b = yield self.translate(e.right, env)
            return a + b
        if isinstance(e, Scale):
            a = yield self.translate(e.body, env)
            return a.scale(e.alpha)
        if isinstance(e, Pair):
            a = yield self.translate(e.left, env)
            b = yield self.translate(e.right, env)
            return (a, b)
        if isinstance(e, Cond):
            a = yield self.translate(e.left, env)
            b = yield self.translate(e.right, env)
            self.statements.append((a, b))
            return ()
        if isinstance(e, Let):
            v = yield self.translate(e.bound, env)
            inner = env if e.name == WILDCARD else {**env, e.name: v}
            return (yield self.translate(e.body, inner))
        if isinstance(e, LetPair):
            v = yield self.translate(e.bound, env)
            inner = dict(env)
            if e.left_name != WILDCARD:
                inner[e.left_name] = v[0]
            if e.right_name != WILDCARD:
                inner[e.right_name] = v[1]
            return (yield self.translate(e.body, inner))
        raise ContractError(f"{type(e).__name__} is outside the core fragment; desugar first")

    def wrap(self, result: ValueTree) -> CoreTerm:
        out: CoreTerm = Return(tuple(_flatten(result)))
        for stmt in reversed(self.statements):
            out = Nu(stmt, out) if isinstance(stmt, str) else CondStmt(stmt[0], stmt[1], out)
        return out


def to_core(e: Term, context: Sequence[str] = ()) -> CoreTerm:
    """Flatten a desugared term over real context variables into the core fragment."""
    clash = any(x.startswith("z") and x[1:].isdigit() for x in context)
    translator = CoreTranslator(prefix="ζ" if clash else "z")
    env: dict[str, ValueTree] = {x: Affine.var(x) for x in context}
    return translator.wrap(trampoline(translator.translate(e, env)))


# -------------------------------------------------------------------
# Core -> surface
# -------------------------------------------------------------------
def affine_to_surface(a: Affine) -> Term:
    parts: list[Term] = [Var(v) if c == 1.0 else Scale(c, Var(v)) for v, c in a.terms]
    if a.const != 0.0 or not parts:
        parts.append(Const(a.const))
    out = parts[0]
    for p in parts[1:]:
        out = Add(out, p)
    return out


def to_surface(t: CoreTerm) -> Term:
    """Back-translation into the (desugared) surface language."""
    prefix, tail = _spine(t)
    if isinstance(tail, Return):
        out = tuple_term([affine_to_surface(a) for a in tail.exprs])
    else:
        # ⊥ of arity k: (0 =:= 1); (0, ..., 0)
        out = Let(WILDCARD, Cond(Const(0.0), Const(1.0)), tuple_term([Const(0.0)] * tail.arity))
    for node in reversed(prefix):
        if isinstance(node, Nu):
            out = Let(node.var, Normal(), out)
        else:
            out = Let(WILDCARD, Cond(affine_to_surface(node.lhs), affine_to_surface(node.rhs)), out)
    return out


# -------------------------------------------------------------------
# Axioms
# -------------------------------------------------------------------
class Axiom(str, Enum):
    DISC = "DISC"
    ORTH = "ORTH"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    TAUT = "TAUT"
    FAIL = "FAIL"
    SUBS = "SUBS"
    INIT = "INIT"
    CONG = "CONG"


def _inapplicable(axiom: Axiom, why: str):
    raise ContractError(f"{axiom.value} does not apply: {why}")


def _nu_block(t: CoreTerm, k: int, axiom: Axiom) -> tuple[list[str], CoreTerm]:
    names = []
    for _ in range(k):
        if not isinstance(t, Nu):
            _inapplicable(axiom, f"expected {k} consecutive ν binders")
        names.append(t.var)
        t = t.body
    return names, t


def _cond_block(t: CoreTerm, k: int, axiom: Axiom) -> tuple[list[CondStmt], CoreTerm]:
    conds = []
    for _ in range(k):
        if not isinstance(t, CondStmt):
            _inapplicable(axiom, f"expected {k} consecutive conditions")
        conds.append(t)
        t = t.body
    return conds, t


def _rewrite_here(t: CoreTerm, axiom: Axiom, matrix: Optional[Matrix], weights: Optional[Sequence[float]]) -> CoreTerm:
    tol = get_tolerances().equal
    if axiom is Axiom.DISC:
        # ν x. t ≡ t   (x not free in t)
        if not isinstance(t, Nu):
            _inapplicable(axiom, "expected ν")
        if t.var in core_free_vars(t.body):
            _inapplicable(axiom, f"{t.var} is used")
        return t.body

    if axiom is Axiom.ORTH:
        # ν x1..xk. t ≡ ν x1..xk. t[U x / x]   (U orthogonal)
        U = np.asarray(matrix, dtype=float)
        k = U.shape[0]
        if U.shape != (k, k) or not np.allclose(U @ U.T, np.eye(k), atol=1e-10):
            _inapplicable(axiom, "the matrix is not orthogonal")
        names, body = _nu_block(t, k, axiom)
        mapping = {x: affine_from_row(U[i], names) for i, x in enumerate(names)}
        out = core_substitute(body, mapping)
        for x in reversed(names):
            out = Nu(x, out)
        return out

    if axiom is Axiom.C1:
        # (a =:= b); (c =:= d); t ≡ (c =:= d); (a =:= b); t
        (first, second), rest = _cond_block(t, 2, axiom)
        return CondStmt(second.lhs, second.rhs, CondStmt(first.lhs, first.rhs, rest))

    if axiom is Axiom.C2:
        # (a =:= b); ν x. t ≡ ν x. (a =:= b); t   (x not free in a, b)
        if isinstance(t, CondStmt) and isinstance(t.body, Nu):
            x = t.body.var
            if x in t.lhs.free_vars | t.rhs.free_vars:
                _inapplicable(axiom, f"the condition mentions {x}")
            return Nu(x, CondStmt(t.lhs, t.rhs, t.body.body))
        if isinstance(t, Nu) and isinstance(t.body, CondStmt):
            c = t.body
            if t.var in c.lhs.free_vars | c.rhs.free_vars:
                _inapplicable(axiom, f"the condition mentions {t.var}")
            return CondStmt(c.lhs, c.rhs, Nu(t.var, c.body))
        _inapplicable(axiom, "expected a condition next to a ν")

    if axiom is Axiom.C3:
        # (a =:= b); ⊥ ≡ ⊥
        if not (isinstance(t, CondStmt) and isinstance(t.body, Bot)):
            _inapplicable(axiom, "expected a condition followed by ⊥")
        return t.body

    if axiom is Axiom.TAUT:
        # (a =:= a); t ≡ t
        if not isinstance(t, CondStmt) or not t.lhs.close_to(t.rhs, tol):
            _inapplicable(axiom, "expected a condition with equal sides")
        return t.body

    if axiom is Axiom.FAIL:
        # (β =:= γ); t ≡ ⊥   (β ≠ γ constants)
        if not (isinstance(t, CondStmt) and t.lhs.is_constant and t.rhs.is_constant):
            _inapplicable(axiom, "expected a condition between constants")
        if abs(t.lhs.const - t.rhs.const) <= tol:
            _inapplicable(axiom, "the constants are equal")
        return Bot(arity(t))

    if axiom is Axiom.SUBS:
        # (a =:= b); r[e] ≡ (a =:= b); r[e + λ (b - a)]
        if not isinstance(t, CondStmt):
            _inapplicable(axiom, "expected a condition")
        delta = t.rhs - t.lhs
        bound: set[str] = set()
        inner = t.body
        while isinstance(inner, (Nu, CondStmt)):
            if isinstance(inner, Nu):
                bound.add(inner.var)
            inner = inner.body
        if not isinstance(inner, Return):
            _inapplicable(axiom, "the condition does not end in a return")
        if bound & delta.free_vars:
            _inapplicable(axiom, "a later binder captures a variable of the condition")
        lam = [] if weights is None else list(weights)
        if len(lam) != len(inner.exprs):
            _inapplicable(axiom, f"need {len(inner.exprs)} weights, got {len(lam)}")
        shifted = Return(tuple(e + delta.scale(w) for e, w in zip(inner.exprs, lam)))
        return CondStmt(t.lhs, t.rhs, _replace_tail(t.body, shifted))

    if axiom is Axiom.INIT:
        # ν x. (x =:= β); t ≡ t[β/x]   (β constant)
        if not (isinstance(t, Nu) and isinstance(t.body, CondStmt)):
            _inapplicable(axiom, "expected ν followed by a condition")
        x, c = t.var, t.body
        if c.lhs == Affine.var(x) and c.rhs.is_constant:
            value = c.rhs
        elif c.rhs == Affine.var(x) and c.lhs.is_constant:
            value = c.lhs
        else:
            _inapplicable(axiom, f"the condition does not initialise {x}")
        return core_substitute(c.body, {x: value})

    if axiom is Axiom.CONG:
        # k conditions a_i =:= b_i are interderivable with S a =:= S b for invertible S
        S = np.asarray(matrix, dtype=float)
        k = S.shape[0]
        if S.shape != (k, k) or numerical_rank(S) < k:
            _inapplicable(axiom, "the recombination matrix is not invertible")
        conds, rest = _cond_block(t, k, axiom)
        out = rest
        for i in reversed(range(k)):
            lhs, rhs = Affine.constant(0.0), Affine.constant(0.0)
            for j, c in enumerate(conds):
                lhs = lhs + c.lhs.scale(S[i, j])
                rhs = rhs + c.rhs.scale(S[i, j])
            out = CondStmt(lhs, rhs, out)
        return out

    raise ContractError(f"unknown axiom {axiom!r}")


def _replace_tail(t: CoreTerm, tail: CoreTerm) -> CoreTerm:
    return _wrap(_spine(t)[0], tail)


def rewrite_step(
    t: CoreTerm,
    axiom: Union[Axiom, str],
    position: int = 0,
    matrix=None,
    weights: Optional[Sequence[float]] = None,
) -> CoreTerm:
    """
    Apply one axiom at `position`, the number of ν / condition prefixes to
    skip. ORTH and CONG take their matrix through `matrix`, SUBS its
    per-component weights through `weights`.
    """
    axiom = Axiom(axiom)
    prefix: list[Union[Nu, CondStmt]] = []
    for _ in range(position):
        if not isinstance(t, (Nu, CondStmt)):
            raise ContractError(f"position {position} is past the end of the term")
        prefix.append(t)
        t = t.body
    out = _rewrite_here(t, axiom, matrix, weights)
    logger.debug(f"{axiom.value}: {pretty_core(t)}  ~>  {pretty_core(out)}")
    return _wrap(prefix, out)


# -------------------------------------------------------------------
# Hoisting
# -------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Hoisted:
    """
    ν z. (P x + A z =:= b); r[Q x + D z + d] after moving every condition
    behind every ν (C1, C2). The condition rows read P x + A z = b.
    """

    context: tuple[str, ...]
    latents: tuple[str, ...]
    P: Matrix
    A: Matrix
    b: Vector
    Q: Matrix
    D: Matrix
    d: Vector


def hoist(t: CoreTerm, context: Sequence[str] = ()) -> Union[Hoisted, Bot]:
    latents: list[str] = []
    conds: list[Affine] = []
    while isinstance(t, (Nu, CondStmt)):
        if isinstance(t, Nu):
            if t.var in latents or t.var in context:
                raise ContractError(f"latent {t.var!r} is bound twice")
            latents.append(t.var)
        else:
            conds.append(t.lhs - t.rhs)
        t = t.body
    if isinstance(t, Bot):
        return t
    free = core_free_vars(t) | set().union(*(c.free_vars for c in conds))
    unknown = free - set(latents) - set(context)
    if unknown:
        raise ContractError(f"free variables {sorted(unknown)} outside the context")
    ctx, lat = list(context), latents
    rows = len(conds)
    P = np.array([c.row(ctx) for c in conds]).reshape(rows, len(ctx))
    A = np.array([c.row(lat) for c in conds]).reshape(rows, len(lat))
    b = -np.array([c.const for c in conds])
    Q = np.array([e.row(ctx) for e in t.exprs]).reshape(len(t.exprs), len(ctx))
    D = np.array([e.row(lat) for e in t.exprs]).reshape(len(t.exprs), len(lat))
    d = np.array([e.const for e in t.exprs])
    return Hoisted(tuple(ctx), tuple(lat), P, A, b, Q, D, d)


# -------------------------------------------------------------------
# Closed normal form
# -------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ClosedNormalForm:
    """ν z. r[A z + c], or ⊥."""

    arity: int
    A: Optional[Matrix] = None
    c: Optional[Vector] = None

    @classmethod
    def bot(cls, arity: int) -> "ClosedNormalForm":
        return cls(arity)

    @property
    def is_bot(self) -> bool:
        return self.A is None

    def to_state(self) -> Union[GaussState, Failure]:
        if self.is_bot:
            return Failure("closed term normalises to ⊥")
        return GaussState.of(self.c, self.A @ self.A.T)

    def to_core(self, prefix: str = "w") -> CoreTerm:
        if self.is_bot:
            return Bot(self.arity)
        names = [f"{prefix}{i + 1}" for i in range(self.A.shape[1])]
        out: CoreTerm = Return(tuple(affine_from_row(self.A[i], names, self.c[i]) for i in range(self.arity)))
        for x in reversed(names):
            out = Nu(x, out)
        return out

    def __repr__(self) -> str:
        if self.is_bot:
            return "ClosedNormalForm(⊥)"
        return f"ClosedNormalForm(A={self.A.tolist()}, c={self.c.tolist()})"


def normalize_closed(t: CoreTerm) -> ClosedNormalForm:
    """
    Hoist to ν z. (A z =:= b); r[D z + d], then change latents by the
    orthogonal V of A = U diag(s) Vᵀ. The first r new latents are pinned by
    the pivot conditions (INIT); the remaining rows read 0 =:= (Uᵀ b)_i and
    either hold (TAUT) or fail (FAIL).
    """
    h = hoist(t)
    if isinstance(h, Bot):
        return ClosedNormalForm.bot(h.arity)
    n_out = h.D.shape[0]
    if h.A.shape[0] == 0:
        return ClosedNormalForm(n_out, h.D, h.d)
    U, s, V = svd(h.A)
    r = numerical_rank(h.A)
    rotated = U.T @ h.b
    residual = rotated[r:]
    tol = get_tolerances().support
    if np.linalg.norm(residual) > tol * (1.0 + np.linalg.norm(h.b)):
        logger.debug(f"closed term fails: residual {np.linalg.norm(residual):.3e}")
        return ClosedNormalForm.bot(n_out)
    pinned = rotated[:r] / s[:r]
    DV = h.D @ V
    return ClosedNormalForm(n_out, DV[:, r:], h.d + DV[:, :r] @ pinned)


# -------------------------------------------------------------------
# Effect normal form
# -------------------------------------------------------------------
def normalize_effect(t: CoreTerm, context: Sequence[str]) -> EffectNormalForm:
    """
    Hoist to ν z. (A x =:= B z + c); r[], bring A to reduced row echelon
    form with an invertible S, and evaluate the closed x-free rows
    ν z. (0 =:= (S B z + S c)_bottom); r[(S B z + S c)_top] with normalize_closed.
    """
    if arity(t) != 0:
        raise ContractError(f"normalize_effect needs a term of unit type, got arity {arity(t)}")
    n = len(context)
    h = hoist(t, context)
    if isinstance(h, Bot):
        return EffectNormalForm.bot(n)
    # P x + A z = b   <=>   P x = B z + c  with B = -A, c = b
    B, c = -h.A, h.b
    red = row_reduce(h.P)
    rank, S = red.rank, red.S
    SB, Sc = S @ B, S @ c
    if h.P.shape[0] > rank:
        # x-free rows of repeated conditions come out of S at rounding level
        system = np.hstack([B, c[:, None]])
        cutoff = rank_cutoff(system.shape, np.linalg.norm(S, 2) * np.linalg.norm(system, 2))
        SB, Sc = np.array(SB), np.array(Sc)
        SB[rank:][np.abs(SB[rank:]) <= cutoff] = 0.0
        Sc[rank:][np.abs(Sc[rank:]) <= cutoff] = 0.0
    latents = list(h.latents)
    core: CoreTerm = Return(tuple(affine_from_row(SB[i], latents, Sc[i]) for i in range(rank)))
    for i in reversed(range(rank, h.P.shape[0])):
        core = CondStmt(Affine.constant(0.0), affine_from_row(SB[i], latents, Sc[i]), core)
    for z in reversed(latents):
        core = Nu(z, core)
    closed = normalize_closed(core)
    if closed.is_bot:
        return EffectNormalForm.bot(n)
    return EffectNormalForm(n, Status.CONSTRAINT, red.R[:rank], closed.c, closed.A @ closed.A.T)
