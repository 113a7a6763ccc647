from typing import Optional

from .checker import Context, typecheck
from .desugar import desugar
from .parser import parse
from .printer import pretty
from .syntax import REAL, UNIT, PairType, Term, Type, flat_size, free_vars, vector_type


def load_program(source: str, context: Optional[Context] = None) -> Term:
    """parse -> typecheck -> desugar."""
    typed = typecheck(parse(source), context)
    return desugar(typed, context)


def implicit_context(source: str) -> dict[str, Type]:
    """Free variables of a program, each of type R, in sorted order."""
    return {name: REAL for name in sorted(free_vars(parse(source)))}


__all__ = [
    "Context",
    "PairType",
    "REAL",
    "Term",
    "Type",
    "UNIT",
    "desugar",
    "flat_size",
    "implicit_context",
    "load_program",
    "parse",
    "pretty",
    "typecheck",
    "vector_type",
]
