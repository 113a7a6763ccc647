# gausslang/generate.py
"""
Seeded random generators of programs, core terms and effects.

All generators take a numpy Generator so every draw is reproducible from a
seed. Coefficients are drawn from [-3, 3].
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .calculus import (
    Affine,
    Axiom,
    Bot,
    CondStmt,
    CoreTerm,
    Nu,
    Return,
    affine_from_row,
    hoist,
    rewrite_step,
)
from .errors import ContractError
from .lang.checker import typecheck
from .lang.syntax import (
    WILDCARD,
    Add,
    Cond,
    Const,
    Let,
    Normal,
    Scale,
    Term,
    Var,
    tuple_term,
)

logger = logging.getLogger(__name__)

COEF_RANGE = 3.0
MAX_DEPTH = 6


def coef(rng: np.random.Generator) -> float:
    return float(np.round(rng.uniform(-COEF_RANGE, COEF_RANGE), 3))


# -------------------------------------------------------------------
# Surface programs
# -------------------------------------------------------------------
class ProgramGenerator:
    """
    Well-typed closed programs of type R^k built from core constructs.
    Below the depth limit a node is a condition followed by a real with
    probability p_cond.
    """

    def __init__(self, rng: np.random.Generator, max_depth: int = MAX_DEPTH, p_cond: float = 0.25):
        self.rng = rng
        self.max_depth = max_depth
        self.p_cond = p_cond
        self._names = 0

    def fresh(self) -> str:
        self._names += 1
        return f"x{self._names}"

    def real(self, depth: int, env: list[str]) -> Term:
        rng = self.rng
        leaves = ["const", "normal"] + (["var"] if env else [])
        if depth >= self.max_depth:
            kind = rng.choice(leaves)
        elif rng.random() < self.p_cond:
            kind = "seq"
        else:
            kind = rng.choice(leaves + ["add", "scale", "let", "let"])
        if kind == "const":
            return Const(coef(rng))
        if kind == "normal":
            return Normal()
        if kind == "var":
            return Var(str(rng.choice(env)))
        if kind == "add":
            return Add(self.real(depth + 1, env), self.real(depth + 1, env))
        if kind == "scale":
            return Scale(coef(rng), self.real(depth + 1, env))
        if kind == "let":
            x = self.fresh()
            return Let(x, self.real(depth + 1, env), self.real(depth + 1, env + [x]))
        # seq: a condition between two reals, then a real
        return Let(WILDCARD, self.condition(depth + 1, env), self.real(depth + 1, env))

    def condition(self, depth: int, env: list[str]) -> Term:
        return Cond(self.real(depth + 1, env), self.real(depth + 1, env))

    def program(self, outputs: Optional[int] = None) -> Term:
        k = int(outputs if outputs is not None else self.rng.integers(1, 4))
        self._names = 0
        return typecheck(tuple_term([self.real(1, []) for _ in range(k)]))


def random_program(
    rng: np.random.Generator,
    max_depth: int = MAX_DEPTH,
    outputs: Optional[int] = None,
    p_cond: float = 0.25,
) -> Term:
    return ProgramGenerator(rng, max_depth, p_cond).program(outputs)


# -------------------------------------------------------------------
# Straight-line programs and dataflow-respecting reorderings
# -------------------------------------------------------------------
@dataclass(frozen=True)
class Statement:
    """let name = rhs, or a condition (name None)."""

    name: Optional[str]
    rhs: Term
    uses: frozenset[str]


@dataclass(frozen=True)
class StraightLine:
    statements: tuple[Statement, ...]
    outputs: tuple[str, ...]

    def to_term(self) -> Term:
        body: Term = tuple_term([Var(x) for x in self.outputs])
        for s in reversed(self.statements):
            body = Let(s.name or WILDCARD, s.rhs, body)
        return typecheck(body)


def _linear(rng: np.random.Generator, env: list[str], noise: bool) -> tuple[Term, frozenset[str]]:
    used = [str(v) for v in rng.choice(env, size=min(len(env), int(rng.integers(1, 3))), replace=False)] if env else []
    parts: list[Term] = [Scale(coef(rng), Var(v)) for v in used]
    if noise or not parts:
        parts.append(Scale(coef(rng), Normal()))
    parts.append(Const(coef(rng)))
    out = parts[0]
    for p in parts[1:]:
        out = Add(out, p)
    return out, frozenset(used)


def random_straight_line(rng: np.random.Generator, n_statements: int = 6, p_cond: float = 0.3) -> StraightLine:
    env: list[str] = []
    stmts: list[Statement] = []
    for i in range(n_statements):
        if env and rng.random() < p_cond:
            lhs, used_l = _linear(rng, env, noise=False)
            rhs, used_r = _linear(rng, env, noise=True)
            stmts.append(Statement(None, Cond(lhs, rhs), used_l | used_r))
        else:
            name = f"y{i}"
            rhs, used = _linear(rng, env, noise=True)
            stmts.append(Statement(name, rhs, used))
            env.append(name)
    k = min(len(env), 3)
    outputs = tuple(str(v) for v in rng.choice(env, size=k, replace=False))
    return StraightLine(tuple(stmts), outputs)


def can_swap(first: Statement, second: Statement) -> bool:
    return first.name is None or first.name not in second.uses


def transpose(rng: np.random.Generator, prog: StraightLine, swaps: int = 5) -> StraightLine:
    """Apply random adjacent transpositions that respect dataflow."""
    stmts = list(prog.statements)
    for _ in range(swaps):
        candidates = [i for i in range(len(stmts) - 1) if can_swap(stmts[i], stmts[i + 1])]
        if not candidates:
            break
        i = int(rng.choice(candidates))
        stmts[i], stmts[i + 1] = stmts[i + 1], stmts[i]
    return StraightLine(tuple(stmts), prog.outputs)


# -------------------------------------------------------------------
# Core terms
# -------------------------------------------------------------------
def random_affine(rng: np.random.Generator, names: Sequence[str], density: float = 0.7) -> Affine:
    coefs = {x: coef(rng) for x in names if rng.random() < density}
    return Affine.of(coefs, coef(rng))


def random_closed_core(
    rng: np.random.Generator,
    n_latents: int = 3,
    n_conds: int = 2,
    arity: int = 2,
    p_fail: float = 0.15,
) -> CoreTerm:
    """ν and condition prefixes interleaved at random, ending in r[...]; sometimes inconsistent."""
    events = ["nu"] * n_latents + ["cond"] * n_conds
    rng.shuffle(events)
    bound: list[str] = []
    prefix: list[tuple] = []
    for ev in events:
        if ev == "nu":
            z = f"z{len(bound) + 1}"
            bound.append(z)
            prefix.append(("nu", z))
        else:
            prefix.append(("cond", random_affine(rng, bound), random_affine(rng, bound)))
    if rng.random() < p_fail:
        # a deterministic contradiction: the same expression equal to two constants
        a = random_affine(rng, bound)
        prefix.append(("cond", a, Affine.constant(1.0)))
        prefix.append(("cond", a, Affine.constant(2.0)))
    out: CoreTerm = Return(tuple(random_affine(rng, bound) for _ in range(arity)))
    for item in reversed(prefix):
        out = Nu(item[1], out) if item[0] == "nu" else CondStmt(item[1], item[2], out)
    return out


def context_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def effect_term(latents: Sequence[str], conds: Sequence[tuple[Affine, Affine]]) -> CoreTerm:
    """ν z1..zk. (a1 =:= b1); ...; r[]."""
    out: CoreTerm = Return(())
    for a, b in reversed(list(conds)):
        out = CondStmt(a, b, out)
    for z in reversed(list(latents)):
        out = Nu(z, out)
    return out


def random_effect(
    rng: np.random.Generator,
    n_context: int = 3,
    n_latents: int = 2,
    n_conds: int = 3,
    closed_rows: int = 0,
    repeats: int = 0,
) -> CoreTerm:
    """
    A unit-type term over x1..xn: every condition reads (affine in x) =:= (affine in z).

    `closed_rows` of the conditions read no context variable. `repeats`
    more are copies of drawn conditions, and then the order is shuffled.
    """
    if closed_rows > n_conds:
        raise ContractError(f"{closed_rows} closed rows out of {n_conds} conditions")
    xs = context_names(n_context)
    zs = [f"z{i + 1}" for i in range(n_latents)]
    conds = [
        (
            Affine.constant(0.0) if i < closed_rows else Affine.of({x: coef(rng) for x in xs}),
            Affine.of({z: coef(rng) for z in zs}, coef(rng)),
        )
        for i in range(n_conds)
    ]
    if conds and repeats:
        conds += [conds[int(i)] for i in rng.integers(0, len(conds), size=repeats)]
        conds = [conds[int(i)] for i in rng.permutation(len(conds))]
    return effect_term(zs, conds)


def _conditioned_layout(t: CoreTerm, context: Sequence[str]) -> tuple[list[str], list[tuple[Affine, Affine]]]:
    h = hoist(t, context)
    if isinstance(h, Bot):
        raise ContractError("effect normalises to ⊥ while hoisting")
    names = list(context) + list(h.latents)
    M = np.hstack([h.P, h.A])
    conds = [(affine_from_row(M[i], names), Affine.constant(h.b[i])) for i in range(M.shape[0])]
    return list(h.latents), conds


def random_orthogonal(rng: np.random.Generator, k: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))


def random_invertible(rng: np.random.Generator, k: int, max_cond: float = 50.0) -> np.ndarray:
    while True:
        S = rng.uniform(-COEF_RANGE, COEF_RANGE, size=(k, k))
        if k == 0 or np.linalg.cond(S) < max_cond:
            return S


def equivalent_presentations(rng: np.random.Generator, t: CoreTerm, context: Sequence[str]) -> list[CoreTerm]:
    """
    Three re-presentations of an effect: permuted conditions, conditions
    recombined by a random invertible matrix (CONG), and latents changed by a
    random orthogonal matrix (ORTH).
    """
    latents, conds = _conditioned_layout(t, context)
    base = effect_term(latents, conds)
    order = rng.permutation(len(conds))
    permuted = effect_term(latents, [conds[i] for i in order])
    recombined = rewrite_step(base, Axiom.CONG, position=len(latents), matrix=random_invertible(rng, len(conds)))
    rotated = rewrite_step(base, Axiom.ORTH, position=0, matrix=random_orthogonal(rng, len(latents)))
    return [permuted, recombined, rotated]
