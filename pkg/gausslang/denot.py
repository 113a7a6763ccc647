# gausslang/denot.py
"""
Denotational semantics: a typed term x1:τ1, ..., xk:τk ⊢ e : τ denotes a
morphism |τ1| + ... + |τk| ~> |τ| of the conditioning category.

The context is flattened left to right (R -> 1, I -> 0, pairs add up).
Let-bound variables are appended behind it, so a let-body is interpreted
in the widened context and precomposed with <id, bound>.
"""
import logging
from typing import Optional, Sequence, Union

import numpy as np

from .cond import (
    CondMorphism,
    J,
    condition_effect,
    obs_compose,
    obs_tupling,
    state_normalize,
)
from .errors import ContractError
from .gauss import (
    Failure,
    GaussMap,
    GaussState,
    affine,
    identity,
    select,
    states_close,
)
from .lang import load_program
from .lang.checker import Context
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
    Type,
    Unit,
    Var,
    flat_size,
    trampoline,
)
from .opsem import observable, run

logger = logging.getLogger(__name__)

# name -> (offset, size) in the flattened context
Layout = dict[str, tuple[int, int]]


def projection(width: int, offset: int, size: int) -> CondMorphism:
    return J(select(width, range(offset, offset + size)))


def tupling(f: CondMorphism, g: CondMorphism) -> CondMorphism:
    return obs_tupling(f, g)


def _generator(width: int, b, Sigma) -> CondMorphism:
    """A generator that ignores its input: R^width -> R^n."""
    b = np.asarray(b, dtype=float)
    return J(GaussMap.make(np.zeros((b.shape[0], width)), b, Sigma))


class Denoter:
    """Compositional interpretation; subterm denotations are yielded so `trampoline` can drive deep terms."""

    def denote(self, e: Term, layout: Layout, width: int):
        if isinstance(e, Var):
            if e.name not in layout:
                raise ContractError(f"unbound variable {e.name!r}")
            offset, size = layout[e.name]
            return projection(width, offset, size)
        if isinstance(e, Const):
            return _generator(width, [e.value], np.zeros((1, 1)))
        if isinstance(e, Unit):
            return _generator(width, np.zeros(0), np.zeros((0, 0)))
        if isinstance(e, Normal):
            return _generator(width, [0.0], np.eye(1))
        if isinstance(e, Add):
            left = yield self.denote(e.left, layout, width)
            right = yield self.denote(e.right, layout, width)
            return obs_compose(J(affine([[1.0, 1.0]])), tupling(left, right))
        if isinstance(e, Scale):
            body = yield self.denote(e.body, layout, width)
            return obs_compose(J(affine([[e.alpha]])), body)
        if isinstance(e, Pair):
            left = yield self.denote(e.left, layout, width)
            right = yield self.denote(e.right, layout, width)
            return tupling(left, right)
        if isinstance(e, Cond):
            # s =:= t  is  (s - t) =:= 0
            left = yield self.denote(e.left, layout, width)
            right = yield self.denote(e.right, layout, width)
            diff = obs_compose(J(affine([[1.0, -1.0]])), tupling(left, right))
            return obs_compose(condition_effect([0.0]), diff)
        if isinstance(e, Let):
            bound = yield self.denote(e.bound, layout, width)
            inner = dict(layout)
            if e.name != WILDCARD:
                inner[e.name] = (width, bound.cod)
            return (yield self._bind(bound, e.body, inner, width))
        if isinstance(e, LetPair):
            bound = yield self.denote(e.bound, layout, width)
            left = flat_size(e.bound.ty.left)
            inner = dict(layout)
            if e.left_name != WILDCARD:
                inner[e.left_name] = (width, left)
            if e.right_name != WILDCARD:
                inner[e.right_name] = (width + left, bound.cod - left)
            return (yield self._bind(bound, e.body, inner, width))
        raise ContractError(f"cannot denote {type(e).__name__}; desugar the term first")

    def _bind(self, bound: CondMorphism, body: Term, inner: Layout, width: int):
        """[[body]] after <id, [[bound]]>."""
        inside = yield self.denote(body, inner, width + bound.cod)
        return obs_compose(inside, tupling(J(identity(width)), bound))


def context_layout(context: Sequence[tuple[str, Type]]) -> tuple[Layout, int]:
    layout: Layout = {}
    offset = 0
    for name, ty in context:
        layout[name] = (offset, flat_size(ty))
        offset += flat_size(ty)
    return layout, offset


def denote(e: Term, context: Union[Context, Sequence[tuple[str, Type]], None] = None) -> CondMorphism:
    """[[e]] : |context| ~> |type of e|, for a desugared typed term."""
    if e.ty is None:
        raise ContractError("denote needs a typechecked term")
    items = list(context.items()) if isinstance(context, dict) else list(context or [])
    layout, width = context_layout(items)
    m = trampoline(Denoter().denote(e, layout, width))
    if m.cod != flat_size(e.ty):
        raise ContractError(f"denotation has codomain {m.cod}, expected {flat_size(e.ty)}")
    logger.debug(f"denoted term as {m}")
    return m


def denote_program(source: str, context: Optional[Context] = None) -> CondMorphism:
    context = dict(context or {})
    return denote(load_program(source, context), context)


def normalized_denotation(e: Term) -> Union[GaussState, Failure]:
    return state_normalize(denote(e))


def check_agreement(e: Term, tol: Optional[float] = None) -> bool:
    """The interpreter's observable matches the normalised denotation; ⊥ matches ⊥."""
    expected = normalized_denotation(e)
    got = observable(run(e))
    agree = states_close(expected, got, tol)
    if not agree:
        logger.info(f"disagreement: denotation {expected!r}, interpreter {got!r}")
    return agree
