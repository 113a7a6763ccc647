# gausslang/lang/syntax.py
"""
Abstract syntax of the Gaussian language.

Types are R, the unit type I and binary products. Terms carry an optional
source location and, once typechecked, their type; neither takes part in
equality, so two parses of the same text compare equal.
"""
from dataclasses import dataclass, field
from types import GeneratorType
from typing import Any, Optional, Union

Loc = Optional[tuple[int, int]]


def trampoline(call: Any) -> Any:
    """
    Drive a recursive pass written as a generator.

    A pass yields the generator of each sub-call and is sent back its result,
    so the depth of a term costs list entries instead of interpreter frames.
    Anything yielded that is not a generator counts as an immediate result.
    """
    if not isinstance(call, GeneratorType):
        return call
    stack = [call]
    result = None
    while stack:
        try:
            sub = stack[-1].send(result)
        except StopIteration as done:
            stack.pop()
            result = done.value
            continue
        if isinstance(sub, GeneratorType):
            stack.append(sub)
            result = None
        else:
            result = sub
    return result


# -------------------------------------------------------------------
# Types
# -------------------------------------------------------------------
@dataclass(frozen=True)
class RealType:
    def __str__(self) -> str:
        return "R"


@dataclass(frozen=True)
class UnitType:
    def __str__(self) -> str:
        return "I"


@dataclass(frozen=True)
class PairType:
    left: "Type"
    right: "Type"

    def __str__(self) -> str:
        return f"({self.left} * {self.right})"


Type = Union[RealType, UnitType, PairType]

REAL = RealType()
UNIT = UnitType()


def flat_size(ty: Type) -> int:
    """R -> 1, I -> 0, pairs add up."""
    total, todo = 0, [ty]
    while todo:
        ty = todo.pop()
        if isinstance(ty, PairType):
            todo += [ty.left, ty.right]
        elif isinstance(ty, RealType):
            total += 1
    return total


def vector_type(n: int) -> Type:
    """R^n as right-nested pairs: I, R, R * R, R * (R * R), ..."""
    if n == 0:
        return UNIT
    ty: Type = REAL
    for _ in range(n - 1):
        ty = PairType(REAL, ty)
    return ty


def is_vector_type(ty: Type) -> bool:
    return ty == vector_type(flat_size(ty))


# -------------------------------------------------------------------
# Terms
# -------------------------------------------------------------------
@dataclass(frozen=True)
class Node:
    loc: Loc = field(default=None, compare=False, repr=False, kw_only=True)
    ty: Optional[Type] = field(default=None, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Add(Node):
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Sub(Node):
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Neg(Node):
    body: "Term"


@dataclass(frozen=True)
class Scale(Node):
    alpha: float
    body: "Term"


@dataclass(frozen=True)
class MatrixLit(Node):
    rows: tuple[tuple[float, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0


@dataclass(frozen=True)
class MatVec(Node):
    matrix: MatrixLit
    body: "Term"


@dataclass(frozen=True)
class Unit(Node):
    pass


@dataclass(frozen=True)
class Pair(Node):
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Let(Node):
    name: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class LetPair(Node):
    left_name: str
    right_name: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class Normal(Node):
    pass


@dataclass(frozen=True)
class NormalParams(Node):
    """normal(mean, variance): a scalar variance or a covariance matrix literal."""

    mean: "Term"
    variance: Union[float, MatrixLit]


@dataclass(frozen=True)
class Observe(Node):
    dist: "Term"
    target: "Term"


@dataclass(frozen=True)
class Cond(Node):
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Seq(Node):
    first: "Term"
    then: "Term"


@dataclass(frozen=True)
class Latent(Node):
    """The latent variable z_index of an operational configuration (1-based)."""

    index: int


@dataclass(frozen=True)
class Hole(Node):
    pass


Term = Union[
    Var, Const, Add, Sub, Neg, Scale, MatrixLit, MatVec, Unit, Pair, Let, LetPair,
    Normal, NormalParams, Observe, Cond, Seq, Latent, Hole,
]

# the constructs left after desugaring
CORE_NODES = (Var, Const, Add, Scale, Unit, Pair, Let, LetPair, Normal, Cond, Latent)

WILDCARD = "_"


def tuple_term(items: list["Term"]) -> "Term":
    """(), e, or right-nested pairs."""
    if not items:
        return Unit()
    out = items[-1]
    for item in reversed(items[:-1]):
        out = Pair(item, out)
    return out


def children(t: "Term") -> list["Term"]:
    if isinstance(t, (Add, Sub, Pair, Cond)):
        return [t.left, t.right]
    if isinstance(t, (Neg, Scale, MatVec)):
        return [t.body]
    if isinstance(t, (Let, LetPair)):
        return [t.bound, t.body]
    if isinstance(t, NormalParams):
        return [t.mean]
    if isinstance(t, Observe):
        return [t.dist, t.target]
    if isinstance(t, Seq):
        return [t.first, t.then]
    return []


def _free_vars(t: "Term"):
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Let):
        bound = yield _free_vars(t.bound)
        body = yield _free_vars(t.body)
        return bound | (body - {t.name})
    if isinstance(t, LetPair):
        bound = yield _free_vars(t.bound)
        body = yield _free_vars(t.body)
        return bound | (body - {t.left_name, t.right_name})
    out: set[str] = set()
    for c in children(t):
        out |= yield _free_vars(c)
    return out


def free_vars(t: "Term") -> set[str]:
    return trampoline(_free_vars(t))


def subterms(t: "Term"):
    """Every node of t, parents before children."""
    todo = [t]
    while todo:
        t = todo.pop()
        yield t
        todo += reversed(children(t))


def is_core(t: "Term") -> bool:
    return all(isinstance(s, CORE_NODES) for s in subterms(t))


def size(t: "Term") -> int:
    return sum(1 for _ in subterms(t))
