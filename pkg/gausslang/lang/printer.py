# gausslang/lang/printer.py
"""Pretty-printer whose output parses back to the same AST."""
from .syntax import (
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
    Scale,
    Seq,
    Sub,
    Term,
    Unit,
    Var,
    trampoline,
)

# binding strength, loosest first
EXPR, COND, SUM, PROD, UNARY, ATOM = range(6)


def number(x: float) -> str:
    return repr(float(x))


def matrix(m: MatrixLit) -> str:
    return "[" + ", ".join("[" + ", ".join(number(v) for v in row) + "]" for row in m.rows) + "]"


def _level(t: Term) -> int:
    if isinstance(t, (Let, LetPair, Seq)):
        return EXPR
    if isinstance(t, Cond):
        return COND
    if isinstance(t, (Add, Sub)):
        return SUM
    if isinstance(t, (Scale, MatVec)):
        return PROD
    if isinstance(t, Neg):
        return UNARY
    if isinstance(t, Const) and t.value < 0:
        return UNARY
    return ATOM


def _at(t: Term, level: int):
    s = yield _show(t)
    return s if _level(t) >= level else f"({s})"


def _show(t: Term):
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Latent):
        return f"z{t.index}"
    if isinstance(t, Hole):
        return "[-]"
    if isinstance(t, Const):
        return number(t.value)
    if isinstance(t, Unit):
        return "()"
    if isinstance(t, Normal):
        return "normal()"
    if isinstance(t, NormalParams):
        v = matrix(t.variance) if isinstance(t.variance, MatrixLit) else number(t.variance)
        mean = yield _at(t.mean, EXPR)
        return f"normal({mean}, {v})"
    if isinstance(t, Observe):
        dist = yield _at(t.dist, EXPR)
        target = yield _at(t.target, EXPR)
        return f"observe({dist}, {target})"
    if isinstance(t, Pair):
        left = yield _at(t.left, EXPR)
        right = yield _at(t.right, EXPR)
        return f"({left}, {right})"
    if isinstance(t, (Add, Sub)):
        left = yield _at(t.left, SUM)
        right = yield _at(t.right, PROD)
        return f"{left} {'+' if isinstance(t, Add) else '-'} {right}"
    if isinstance(t, Scale):
        body = yield _at(t.body, PROD)
        return f"{number(t.alpha)} · {body}"
    if isinstance(t, MatVec):
        body = yield _at(t.body, PROD)
        return f"{matrix(t.matrix)} · {body}"
    if isinstance(t, Neg):
        # "-2.0" would read back as a negative literal
        if isinstance(t.body, Const):
            return f"-({number(t.body.value)})"
        body = yield _at(t.body, ATOM)
        return f"-{body}"
    if isinstance(t, Cond):
        left = yield _at(t.left, SUM)
        right = yield _at(t.right, SUM)
        return f"{left} =:= {right}"
    if isinstance(t, Seq):
        first = yield _at(t.first, COND)
        then = yield _at(t.then, EXPR)
        return f"{first}; {then}"
    if isinstance(t, Let):
        bound = yield _at(t.bound, EXPR)
        body = yield _at(t.body, EXPR)
        return f"let {t.name} = {bound} in {body}"
    if isinstance(t, LetPair):
        bound = yield _at(t.bound, EXPR)
        body = yield _at(t.body, EXPR)
        return f"let ({t.left_name}, {t.right_name}) = {bound} in {body}"
    if isinstance(t, MatrixLit):
        return matrix(t)
    raise TypeError(f"cannot print {type(t).__name__}")


def pretty(t: Term) -> str:
    return trampoline(_show(t))
