# gausslang/lang/checker.py
"""
Typing rules. Every rule failure raises TypeCheckError naming the rule.

    x : τ in Γ          =>  Γ ⊢ x : τ                         (var)
    Γ ⊢ s, t : R        =>  Γ ⊢ s + t : R, s - t : R          (add)
    Γ ⊢ t : R           =>  Γ ⊢ α · t : R, -t : R             (scale)
    Γ ⊢ β : R, Γ ⊢ () : I, Γ ⊢ normal() : R                   (const, unit, normal)
    Γ ⊢ s : σ, t : τ    =>  Γ ⊢ (s, t) : σ * τ                (pair)
    Γ ⊢ s : σ, Γ, x:σ ⊢ t : τ   =>  Γ ⊢ let x = s in t : τ    (let)
    Γ ⊢ s : σ1 * σ2, Γ, x:σ1, y:σ2 ⊢ t : τ  =>  let (x, y)    (let-pair)
    Γ ⊢ s, t : R        =>  Γ ⊢ s =:= t : I                   (cond)
    Γ ⊢ s : I, Γ ⊢ t : τ  =>  Γ ⊢ s; t : τ                    (seq)

plus the sugar: normal(μ, v), observe(D, x) and M · e over R^n.
"""
import logging
from dataclasses import replace
from typing import Mapping, Optional

import numpy as np

from ..errors import TypeCheckError
from .syntax import (
    REAL,
    UNIT,
    WILDCARD,
    Add,
    Cond,
    Const,
    Hole,
    Latent,
    Let,
    LetPair,
    MatrixLit,
    MatVec,
    Neg,
    Normal,
    NormalParams,
    Observe,
    Pair,
    PairType,
    Scale,
    Seq,
    Sub,
    Term,
    Type,
    Unit,
    Var,
    flat_size,
    is_vector_type,
    trampoline,
    vector_type,
)

logger = logging.getLogger(__name__)

Context = Mapping[str, Type]


def _fail(t: Term, rule: str, message: str):
    line, column = t.loc if t.loc else (None, None)
    raise TypeCheckError(message, rule, line, column)


def _expect(t: Term, got: Type, want: Type, rule: str, what: str):
    if got != want:
        _fail(t, rule, f"{what} has type {got}, expected {want}")


class Checker:
    """
    Annotates every node with its type. Shadowing is lexical.

    Rules with premises are generators that yield the check of each subterm;
    `typecheck` drives them through `trampoline`.
    """

    def __init__(self, latent_count: int = 0):
        self.latent_count = latent_count

    def check(self, t: Term, ctx: Context):
        method = getattr(self, f"_check_{type(t).__name__}")
        return method(t, ctx)

    def _check_Var(self, t: Var, ctx: Context):
        if t.name not in ctx:
            _fail(t, "var", f"unbound variable {t.name!r}")
        return replace(t, ty=ctx[t.name])

    def _check_Const(self, t: Const, ctx: Context):
        if not np.isfinite(t.value):
            _fail(t, "const", f"constant {t.value} is not finite")
        return replace(t, ty=REAL)

    def _real_binop(self, t, ctx: Context, rule: str):
        left = yield self.check(t.left, ctx)
        right = yield self.check(t.right, ctx)
        _expect(t, left.ty, REAL, rule, "left operand")
        _expect(t, right.ty, REAL, rule, "right operand")
        return replace(t, left=left, right=right, ty=REAL)

    def _check_Add(self, t: Add, ctx: Context):
        return self._real_binop(t, ctx, "add")

    def _check_Sub(self, t: Sub, ctx: Context):
        return self._real_binop(t, ctx, "add")

    def _check_Neg(self, t: Neg, ctx: Context):
        body = yield self.check(t.body, ctx)
        _expect(t, body.ty, REAL, "scale", "negated term")
        return replace(t, body=body, ty=REAL)

    def _check_Scale(self, t: Scale, ctx: Context):
        if not np.isfinite(t.alpha):
            _fail(t, "scale", f"scalar {t.alpha} is not finite")
        body = yield self.check(t.body, ctx)
        _expect(t, body.ty, REAL, "scale", "scaled term")
        return replace(t, body=body, ty=REAL)

    def _check_MatrixLit(self, t: MatrixLit, ctx: Context):
        _fail(t, "matrix", "a matrix literal is only allowed as a covariance or as the left factor of '·'")

    def _check_MatVec(self, t: MatVec, ctx: Context):
        rows, cols = t.matrix.shape
        body = yield self.check(t.body, ctx)
        _expect(t, body.ty, vector_type(cols), "matvec", f"operand of a {rows}x{cols} matrix")
        return replace(t, body=body, ty=vector_type(rows))

    def _check_Unit(self, t: Unit, ctx: Context):
        return replace(t, ty=UNIT)

    def _check_Pair(self, t: Pair, ctx: Context):
        left = yield self.check(t.left, ctx)
        right = yield self.check(t.right, ctx)
        return replace(t, left=left, right=right, ty=PairType(left.ty, right.ty))

    def _check_Let(self, t: Let, ctx: Context):
        bound = yield self.check(t.bound, ctx)
        inner = {**ctx, t.name: bound.ty} if t.name != WILDCARD else ctx
        body = yield self.check(t.body, inner)
        return replace(t, bound=bound, body=body, ty=body.ty)

    def _check_LetPair(self, t: LetPair, ctx: Context):
        bound = yield self.check(t.bound, ctx)
        if not isinstance(bound.ty, PairType):
            _fail(t, "let-pair", f"destructured term has type {bound.ty}, expected a pair")
        if t.left_name == t.right_name and t.left_name != WILDCARD:
            _fail(t, "let-pair", f"pattern binds {t.left_name!r} twice")
        inner = dict(ctx)
        if t.left_name != WILDCARD:
            inner[t.left_name] = bound.ty.left
        if t.right_name != WILDCARD:
            inner[t.right_name] = bound.ty.right
        body = yield self.check(t.body, inner)
        return replace(t, bound=bound, body=body, ty=body.ty)

    def _check_Normal(self, t: Normal, ctx: Context):
        return replace(t, ty=REAL)

    def _check_NormalParams(self, t: NormalParams, ctx: Context):
        mean = yield self.check(t.mean, ctx)
        if isinstance(t.variance, MatrixLit):
            rows, cols = t.variance.shape
            if rows != cols:
                _fail(t, "normal", f"covariance must be square, got {rows}x{cols}")
            _expect(t, mean.ty, vector_type(rows), "normal", "mean")
        else:
            _expect(t, mean.ty, REAL, "normal", "mean")
            if not t.variance >= 0:
                _fail(t, "normal", f"variance {t.variance} is negative")
        return replace(t, mean=mean, ty=mean.ty)

    def _check_Observe(self, t: Observe, ctx: Context):
        dist = yield self.check(t.dist, ctx)
        target = yield self.check(t.target, ctx)
        if not is_vector_type(dist.ty):
            _fail(t, "observe", f"observed distribution has type {dist.ty}, expected R^n")
        _expect(t, target.ty, dist.ty, "observe", "observed value")
        return replace(t, dist=dist, target=target, ty=UNIT)

    def _check_Cond(self, t: Cond, ctx: Context):
        left = yield self.check(t.left, ctx)
        right = yield self.check(t.right, ctx)
        _expect(t, left.ty, REAL, "cond", "left side of '=:='")
        _expect(t, right.ty, REAL, "cond", "right side of '=:='")
        return replace(t, left=left, right=right, ty=UNIT)

    def _check_Seq(self, t: Seq, ctx: Context):
        first = yield self.check(t.first, ctx)
        _expect(t, first.ty, UNIT, "seq", "statement before ';'")
        then = yield self.check(t.then, ctx)
        return replace(t, first=first, then=then, ty=then.ty)

    def _check_Latent(self, t: Latent, ctx: Context):
        if not 1 <= t.index <= self.latent_count:
            _fail(t, "var", f"latent z{t.index} is not allocated")
        return replace(t, ty=REAL)

    def _check_Hole(self, t: Hole, ctx: Context):
        _fail(t, "hole", "a context hole is not a term")


def typecheck(t: Term, context: Optional[Context] = None, latent_count: int = 0) -> Term:
    """Return t with every node annotated by its type."""
    typed = trampoline(Checker(latent_count).check(t, dict(context or {})))
    logger.debug(f"typechecked program at type {typed.ty}")
    return typed


def context_size(context: Context) -> int:
    return sum(flat_size(ty) for ty in context.values())
