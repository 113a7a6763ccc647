# gausslang/lang/desugar.py
"""
Elimination of surface sugar.

    s - t                 ->  s + (-1) · t
    -t                    ->  (-1) · t
    s; t                  ->  let _ = s in t
    normal(μ, σ²)         ->  μ + σ · normal()
    normal(μ, Σ)          ->  μ + A · (normal(), ..., normal())   with A Aᵀ = Σ
    M · e                 ->  componentwise linear combinations of e
    observe(D, x)         ->  let y = D in x =:= y                componentwise on R^n

The output uses only core constructs and is typechecked again.
"""
import itertools
import logging
import math
from typing import Callable, Optional

import numpy as np

from ..errors import ContractError
from ..linalg import psd_root
from .checker import Context, typecheck
from .syntax import (
    WILDCARD,
    Add,
    Cond,
    Const,
    Let,
    LetPair,
    MatrixLit,
    MatVec,
    Neg,
    Normal,
    NormalParams,
    Observe,
    Pair,
    Scale,
    Seq,
    Sub,
    Term,
    Unit,
    Var,
    flat_size,
    trampoline,
    tuple_term,
)

logger = logging.getLogger(__name__)


def linear_combination(coefs, terms: list[Term], offset: Optional[Term] = None) -> Term:
    """offset + Σ coefs[j] · terms[j], skipping zero coefficients."""
    parts: list[Term] = [] if offset is None else [offset]
    for c, t in zip(coefs, terms):
        c = float(c)
        if c == 0.0:
            continue
        parts.append(t if c == 1.0 else Scale(c, t))
    if not parts:
        return Const(0.0)
    out = parts[0]
    for p in parts[1:]:
        out = Add(out, p)
    return out


def sequence(stmts: list[Term], last: Term) -> Term:
    for s in reversed(stmts):
        last = Let(WILDCARD, s, last)
    return last


class Desugarer:
    """Generator-based rewriting; `desugar` drives it through `trampoline`."""

    def __init__(self):
        self._fresh = itertools.count(1)

    def fresh(self, base: str) -> str:
        # '%' never appears in source identifiers
        return f"{base}%{next(self._fresh)}"

    def destructure(self, bound: Term, n: int, body: Callable[[list[Term]], Term]) -> Term:
        """Bind the n components of an R^n-valued term and pass them on as variables."""
        if n == 0:
            return Let(WILDCARD, bound, body([]))
        name = self.fresh("v")
        if n == 1:
            return Let(name, bound, body([Var(name)]))
        splits: list[tuple[str, str, Term]] = []
        vec: Term = Var(name)
        for _ in range(n - 1):
            head, rest = self.fresh("h"), self.fresh("t")
            splits.append((head, rest, vec))
            vec = Var(rest)
        out = body([Var(head) for head, _, _ in splits] + [vec])
        for head, rest, v in reversed(splits):
            out = LetPair(head, rest, v, out)
        return Let(name, bound, out)

    def run(self, t: Term):
        method = getattr(self, f"_ds_{type(t).__name__}", None)
        if method is None:
            return t  # leaves: Var, Const, Unit, Normal, Latent
        return method(t)

    def _ds_Add(self, t: Add):
        left = yield self.run(t.left)
        right = yield self.run(t.right)
        return Add(left, right, loc=t.loc)

    def _ds_Sub(self, t: Sub):
        left = yield self.run(t.left)
        right = yield self.run(t.right)
        return Add(left, Scale(-1.0, right), loc=t.loc)

    def _ds_Neg(self, t: Neg):
        body = yield self.run(t.body)
        return Scale(-1.0, body, loc=t.loc)

    def _ds_Scale(self, t: Scale):
        body = yield self.run(t.body)
        return Scale(t.alpha, body, loc=t.loc)

    def _ds_Pair(self, t: Pair):
        left = yield self.run(t.left)
        right = yield self.run(t.right)
        return Pair(left, right, loc=t.loc)

    def _ds_Let(self, t: Let):
        bound = yield self.run(t.bound)
        body = yield self.run(t.body)
        return Let(t.name, bound, body, loc=t.loc)

    def _ds_LetPair(self, t: LetPair):
        bound = yield self.run(t.bound)
        body = yield self.run(t.body)
        return LetPair(t.left_name, t.right_name, bound, body, loc=t.loc)

    def _ds_Cond(self, t: Cond):
        left = yield self.run(t.left)
        right = yield self.run(t.right)
        return Cond(left, right, loc=t.loc)

    def _ds_Seq(self, t: Seq):
        first = yield self.run(t.first)
        then = yield self.run(t.then)
        return Let(WILDCARD, first, then, loc=t.loc)

    def _ds_NormalParams(self, t: NormalParams):
        mean = yield self.run(t.mean)
        if not isinstance(t.variance, MatrixLit):
            if t.variance < 0:
                raise ContractError(f"variance {t.variance} is negative")
            return Add(mean, Scale(math.sqrt(t.variance), Normal()), loc=t.loc)
        A = psd_root(np.array(t.variance.rows, dtype=float))
        n, k = A.shape
        noise = [self.fresh("z") for _ in range(k)]

        def build(means: list[Term]) -> Term:
            out = tuple_term([linear_combination(A[i], [Var(z) for z in noise], means[i]) for i in range(n)])
            for z in reversed(noise):
                out = Let(z, Normal(), out)
            return out

        return self.destructure(mean, n, build)

    def _ds_MatVec(self, t: MatVec):
        M = np.array(t.matrix.rows, dtype=float)
        body = yield self.run(t.body)
        return self.destructure(
            body,
            M.shape[1],
            lambda xs: tuple_term([linear_combination(M[i], xs) for i in range(M.shape[0])]),
        )

    def _ds_Observe(self, t: Observe):
        n = flat_size(t.dist.ty)
        if n == 1:
            y = self.fresh("y")
            dist = yield self.run(t.dist)
            target = yield self.run(t.target)
            return Let(y, dist, Cond(target, Var(y)), loc=t.loc)
        target = yield self.run(t.target)
        dist = yield self.run(t.dist)
        return self.destructure(
            dist,
            n,
            lambda ys: self.destructure(
                target, n, lambda xs: sequence([Cond(x, y) for x, y in zip(xs, ys)], Unit())
            ),
        )


def desugar(t: Term, context: Optional[Context] = None) -> Term:
    """Rewrite a typed term into core constructs and typecheck the result at the same context."""
    if t.ty is None:
        raise ContractError("desugar needs a typechecked term")
    core = trampoline(Desugarer().run(t))
    typed = typecheck(core, context)
    if typed.ty != t.ty:
        raise ContractError(f"desugaring changed the type from {t.ty} to {typed.ty}")
    return typed
