# gausslang/opsem.py
"""
Small-step operational semantics over symbolic Gaussian states.

A configuration is (e, psi) with e a term over latents z1..zr and psi a
Gaussian on R^r, or ⊥. Every non-value term decomposes uniquely as C[rho]
with one of the redexes

    normal()            ->  z_{r+1}        psi ⊗ N(0, 1)
    v =:= w             ->  ()             psi | (v - w = 0), or ⊥
    let x = v in e      ->  e[v/x]
    let (x, y) = (v, w) in e  ->  e[v/x, w/y]

The evaluation contexts are

    C ::= [-] | C + e | v + C | α · C | (C, e) | (v, C)
        | let x = C in e | let (x, y) = C in e | C =:= e | v =:= C
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import ContractError
from .gauss import (
    Failure,
    GaussState,
    affine,
    compose,
    condition_dist,
    is_failure,
    standard_normal,
    tensor,
)
from .lang.printer import pretty
from .lang.syntax import (
    WILDCARD,
    Add,
    Cond,
    Const,
    Hole,
    Latent,
    Let,
    LetPair,
    Normal,
    Pair,
    Scale,
    Term,
    Unit,
    Var,
    is_core,
    trampoline,
)
from .linalg import Matrix, Vector
from .schemas import StateOut, TraceStep

logger = logging.getLogger(__name__)

EMPTY_PRIOR = GaussState.of(np.zeros(0), np.zeros((0, 0)))


@dataclass(frozen=True, eq=False)
class Running:
    term: Term
    prior: GaussState

    @property
    def latent_count(self) -> int:
        return self.prior.dim


class Bot:
    """The failure configuration ⊥."""

    def __eq__(self, other) -> bool:
        return isinstance(other, Bot)

    def __hash__(self) -> int:
        return hash(Bot)

    def __repr__(self) -> str:
        return "⊥"


BOT = Bot()

Configuration = Union[Running, Bot]


# -------------------------------------------------------------------
# Values
# -------------------------------------------------------------------
def is_value(t: Term) -> bool:
    todo = [t]
    while todo:
        t = todo.pop()
        if isinstance(t, (Add, Pair)):
            todo += [t.left, t.right]
        elif isinstance(t, Scale):
            todo.append(t.body)
        elif not isinstance(t, (Latent, Const, Unit)):
            return False
    return True


@dataclass(frozen=True, eq=False)
class ValueExpr:
    """The affine map R^r -> R^n, x |-> V x + w, defined by a value term."""

    V: Matrix
    w: Vector

    def __add__(self, other: "ValueExpr") -> "ValueExpr":
        return ValueExpr(self.V + other.V, self.w + other.w)

    def scaled(self, alpha: float) -> "ValueExpr":
        return ValueExpr(alpha * self.V, alpha * self.w)

    def pushforward(self, prior: GaussState) -> GaussState:
        return compose(affine(self.V, self.w), prior)


def value_expr(v: Term, r: int) -> ValueExpr:
    if isinstance(v, Latent):
        V = np.zeros((1, r))
        V[0, v.index - 1] = 1.0
        return ValueExpr(V, np.zeros(1))
    if isinstance(v, Const):
        return ValueExpr(np.zeros((1, r)), np.array([v.value]))
    if isinstance(v, Unit):
        return ValueExpr(np.zeros((0, r)), np.zeros(0))
    if isinstance(v, Pair):
        # tuples nest to the right
        parts = []
        while isinstance(v, Pair):
            parts.append(value_expr(v.left, r))
            v = v.right
        parts.append(value_expr(v, r))
        return ValueExpr(np.vstack([p.V for p in parts]), np.concatenate([p.w for p in parts]))
    if isinstance(v, Add):
        # sums nest to the left
        out = value_expr(v.right, r)
        while isinstance(v.left, Add):
            v = v.left
            out = out + value_expr(v.right, r)
        return out + value_expr(v.left, r)
    if isinstance(v, Scale):
        return value_expr(v.body, r).scaled(v.alpha)
    raise ContractError(f"{pretty(v)} is not a value")


# -------------------------------------------------------------------
# Decomposition
# -------------------------------------------------------------------
def _rebuild(path: list[tuple[Term, str]], t: Term) -> Term:
    for node, slot in reversed(path):
        t = replace(node, **{slot: t})
    return t


def plug(context: Term, t: Term) -> Term:
    """C[t]: replace the hole of an evaluation context."""
    path: list[tuple[Term, str]] = []
    while not isinstance(context, Hole):
        if isinstance(context, (Add, Pair, Cond)):
            slot = "left" if contains_hole(context.left) else "right"
        elif isinstance(context, Scale):
            slot = "body"
        elif isinstance(context, (Let, LetPair)):
            slot = "bound"
        else:
            raise ContractError(f"{type(context).__name__} is not an evaluation context")
        path.append((context, slot))
        context = getattr(context, slot)
    return _rebuild(path, t)


def contains_hole(t: Term) -> bool:
    todo = [t]
    while todo:
        t = todo.pop()
        if isinstance(t, Hole):
            return True
        if isinstance(t, (Add, Pair, Cond)):
            todo += [t.left, t.right]
        elif isinstance(t, Scale):
            todo.append(t.body)
        elif isinstance(t, (Let, LetPair)):
            todo.append(t.bound)
    return False


def decompose(e: Term) -> Optional[tuple[Term, Term]]:
    """None for a value, else the unique (C, rho) with e = C[rho]."""
    if is_value(e):
        return None
    path: list[tuple[Term, str]] = []
    while not isinstance(e, Normal):
        if isinstance(e, (Add, Pair, Cond)):
            if not is_value(e.left):
                slot = "left"
            elif not is_value(e.right):
                slot = "right"
            else:
                break  # only Cond reaches here: v =:= w
        elif isinstance(e, Scale):
            slot = "body"
        elif isinstance(e, (Let, LetPair)):
            if is_value(e.bound):
                break
            slot = "bound"
        else:
            raise ContractError(f"cannot evaluate {type(e).__name__}; run works on closed desugared terms")
        path.append((e, slot))
        e = getattr(e, slot)
    return _rebuild(path, Hole()), e


# -------------------------------------------------------------------
# Substitution of closed values
# -------------------------------------------------------------------
def _substitute(t: Term, name: str, v: Term):
    # untouched subterms are returned as they are
    if isinstance(t, Var):
        return v if t.name == name else t
    if isinstance(t, (Add, Pair, Cond)):
        left = yield _substitute(t.left, name, v)
        right = yield _substitute(t.right, name, v)
        if left is t.left and right is t.right:
            return t
        return replace(t, left=left, right=right)
    if isinstance(t, Scale):
        body = yield _substitute(t.body, name, v)
        return t if body is t.body else replace(t, body=body)
    if isinstance(t, (Let, LetPair)):
        bound = yield _substitute(t.bound, name, v)
        binds = {t.name} if isinstance(t, Let) else {t.left_name, t.right_name}
        body = t.body if name in binds else (yield _substitute(t.body, name, v))
        if bound is t.bound and body is t.body:
            return t
        return replace(t, bound=bound, body=body)
    return t


def substitute(t: Term, name: str, v: Term) -> Term:
    if name == WILDCARD:
        return t
    return trampoline(_substitute(t, name, v))


# -------------------------------------------------------------------
# Reduction
# -------------------------------------------------------------------
def _reduce(redex: Term, prior: GaussState) -> tuple[Optional[Term], Union[GaussState, Failure]]:
    r = prior.dim
    if isinstance(redex, Normal):
        return Latent(r + 1), tensor(prior, standard_normal(1))
    if isinstance(redex, Cond):
        diff = value_expr(redex.left, r) + value_expr(redex.right, r).scaled(-1.0)
        # joint law of (X, Z) with Z = v(X) - w(X), conditioned on Z = 0
        joint = compose(affine(np.vstack([np.eye(r), diff.V]), np.concatenate([np.zeros(r), diff.w])), prior)
        return Unit(), condition_dist(joint, [r], [0.0])
    if isinstance(redex, Let):
        return substitute(redex.body, redex.name, redex.bound), prior
    if isinstance(redex, LetPair):
        if not isinstance(redex.bound, Pair):
            raise ContractError(f"let-pair bound to non-pair value {pretty(redex.bound)}")
        body = substitute(redex.body, redex.left_name, redex.bound.left)
        if redex.right_name != redex.left_name:
            body = substitute(body, redex.right_name, redex.bound.right)
        return body, prior
    raise ContractError(f"{pretty(redex)} is not a redex")


def step(c: Configuration) -> Configuration:
    if isinstance(c, Bot):
        raise ContractError("⊥ does not step")
    split = decompose(c.term)
    if split is None:
        raise ContractError("a value does not step")
    context, redex = split
    reduct, prior = _reduce(redex, c.prior)
    if is_failure(prior):
        logger.debug(f"condition {pretty(redex)} failed")
        return BOT
    logger.debug(f"reduced {type(redex).__name__}; prior has dimension {prior.dim}")
    return Running(plug(context, reduct), prior)


@dataclass(eq=False)
class RunResult:
    config: Configuration
    steps: int
    trace: list[TraceStep] = field(default_factory=list)

    @property
    def is_bot(self) -> bool:
        return isinstance(self.config, Bot)

    @property
    def value(self) -> Optional[Term]:
        return None if self.is_bot else self.config.term

    @property
    def prior(self) -> Optional[GaussState]:
        return None if self.is_bot else self.config.prior


def _trace_step(c: Configuration) -> TraceStep:
    if isinstance(c, Bot):
        return TraceStep(term="⊥", prior=None)
    return TraceStep(term=pretty(c.term), prior=StateOut.from_state(c.prior))


def run(e: Term, trace: bool = False) -> RunResult:
    """Iterate step from (e, !) until a value or ⊥."""
    if not is_core(e):
        raise ContractError("run needs a desugared term")
    config: Configuration = Running(e, EMPTY_PRIOR)
    steps = 0
    recorded = [_trace_step(config)] if trace else []
    while isinstance(config, Running) and not is_value(config.term):
        config = step(config)
        steps += 1
        if trace:
            recorded.append(_trace_step(config))
    logger.debug(f"run finished after {steps} steps: {'⊥' if isinstance(config, Bot) else 'value'}")
    return RunResult(config, steps, recorded)


def observable(result: Union[RunResult, Configuration]) -> Union[GaussState, Failure]:
    """The pushforward v_* psi of a terminal configuration."""
    config = result.config if isinstance(result, RunResult) else result
    if isinstance(config, Bot):
        return Failure("the program failed")
    if not is_value(config.term):
        raise ContractError("observable needs a terminal configuration")
    return value_expr(config.term, config.prior.dim).pushforward(config.prior)


def permute_latents(config: Running, perm: list[int]) -> Running:
    """Rename z_{perm[i]+1} to z_{i+1} and reorder the prior to match."""
    r = config.prior.dim
    if sorted(perm) != list(range(r)):
        raise ContractError(f"{perm} is not a permutation of {r} latents")
    inverse = {old + 1: new + 1 for new, old in enumerate(perm)}

    def rename(t: Term):
        if isinstance(t, Latent):
            return Latent(inverse[t.index])
        if isinstance(t, (Add, Pair, Cond)):
            left = yield rename(t.left)
            right = yield rename(t.right)
            return replace(t, left=left, right=right)
        if isinstance(t, Scale):
            body = yield rename(t.body)
            return replace(t, body=body)
        if isinstance(t, (Let, LetPair)):
            bound = yield rename(t.bound)
            body = yield rename(t.body)
            return replace(t, bound=bound, body=body)
        return t

    P = np.eye(r)[perm].reshape(r, r)
    return Running(trampoline(rename(config.term)), compose(affine(P), config.prior))
