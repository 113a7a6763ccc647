"""Gaussian programs with exact conditioning: interpreter, denotation and normal forms."""
from .cond import CondMorphism, canonicalize, equiv
from .denot import denote, denote_program
from .gauss import Failure, GaussMap, GaussState, condition_dist
from .lang import load_program, parse, pretty, typecheck
from .opsem import observable, run

__all__ = [
    "CondMorphism",
    "Failure",
    "GaussMap",
    "GaussState",
    "canonicalize",
    "condition_dist",
    "denote",
    "denote_program",
    "equiv",
    "load_program",
    "observable",
    "parse",
    "pretty",
    "run",
    "typecheck",
]
