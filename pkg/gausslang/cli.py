# gausslang/cli.py
"""
Command-line front end.

    python -m gausslang run <file> [--trace] [--json]
    python -m gausslang equiv <f1> <f2> [--json]
    python -m gausslang normalize <file> [--json]
    python -m gausslang example <name> [--param k=v]... --out <dir>

Exit codes: 0 success, 2 the program (or its normal form) is ⊥, 1 static error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from .calculus import normalize_closed, normalize_effect, pretty_core, to_core
from .cond import canonicalize, records_close
from .config import configure_logging
from .denot import denote
from .errors import ConfigError, ContractError, GaussLangError, ParseError, TypeCheckError
from .examples import build_example, write_example
from .gauss import is_failure
from .lang import REAL, Type, implicit_context, load_program, vector_type
from .opsem import observable, run
from .schemas import (
    CanonicalRecordOut,
    ClosedNormalFormOut,
    EffectOut,
    EquivReport,
    ExampleSpec,
    RunReport,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_STATIC = 1
EXIT_BOT = 2


def parse_context(spec: Optional[str]) -> Optional[dict[str, Type]]:
    """'x,y,v:3' -> {x: R, y: R, v: R^3}."""
    if spec is None:
        return None
    context: dict[str, Type] = {}
    for entry in filter(None, (e.strip() for e in spec.split(","))):
        name, _, dim = entry.partition(":")
        try:
            n = int(dim) if dim else 1
        except ValueError:
            raise ContractError(f"bad context entry {entry!r}; expected name or name:n")
        context[name.strip()] = vector_type(n) if n != 1 else REAL
    return context


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ContractError(f"cannot read {path}: {e.strerror}")


def _load(path: str, context: Optional[dict[str, Type]]):
    source = _read(path)
    context = implicit_context(source) if context is None else context
    term = load_program(source, context)
    logger.info(f"loaded {path}: type {term.ty}, context {list(context)}")
    return term, context


def _fmt(a) -> str:
    return np.array2string(np.asarray(a), precision=6, suppress_small=True)


# -------------------------------------------------------------------
# Commands
# -------------------------------------------------------------------
def cmd_run(args) -> int:
    term, context = _load(args.file, parse_context(args.context))
    if context:
        raise ContractError(f"run needs a closed program; free variables {list(context)}")
    result = run(term, trace=args.trace)
    psi = observable(result)
    logger.info(f"run finished after {result.steps} steps")
    if is_failure(psi):
        report = RunReport(status="bot", step_count=result.steps)
    else:
        report = RunReport(
            status="ok",
            mean=psi.mean.tolist(),
            cov=psi.cov.tolist(),
            latent_count=result.prior.dim,
            step_count=result.steps,
        )
    if args.trace:
        report = report.model_copy(update={"trace": result.trace})
    if args.json:
        print(report.model_dump_json(indent=2, exclude_none=True))
    else:
        for i, s in enumerate(report.trace or []):
            print(f"[{i}] {s.term}")
        if report.status == "bot":
            print("⊥")
        else:
            print(f"mean = {_fmt(report.mean)}")
            print(f"cov  =\n{_fmt(report.cov)}")
            print(f"latents = {report.latent_count}, steps = {report.step_count}")
    return EXIT_BOT if report.status == "bot" else EXIT_OK


def cmd_equiv(args) -> int:
    explicit = parse_context(args.context)
    if explicit is None:
        merged = {**implicit_context(_read(args.file1)), **implicit_context(_read(args.file2))}
        explicit = dict(sorted(merged.items()))
    t1, context = _load(args.file1, explicit)
    t2, _ = _load(args.file2, explicit)
    if t1.ty != t2.ty:
        raise ContractError(f"programs have different types: {t1.ty} and {t2.ty}")
    m1, m2 = denote(t1, context), denote(t2, context)
    r1, r2 = canonicalize(m1), canonicalize(m2)
    report = EquivReport(
        equivalent=records_close(r1, r2),
        dom=m1.dom,
        cod=m1.cod,
        left=CanonicalRecordOut.from_record(r1),
        right=CanonicalRecordOut.from_record(r2),
    )
    if args.json:
        print(report.model_dump_json(indent=2, exclude_none=True))
    else:
        print("equivalent" if report.equivalent else "inequivalent")
        for label, rec in (("left", r1), ("right", r2)):
            print(f"{label}: {rec.effect!r}")
            if not rec.is_bot:
                print(f"  posterior A =\n{_fmt(rec.posterior.A)}\n  b = {_fmt(rec.posterior.b)}")
                print(f"  Sigma =\n{_fmt(rec.posterior.Sigma)}")
    return EXIT_OK


def cmd_normalize(args) -> int:
    term, context = _load(args.file, parse_context(args.context))
    if any(ty != REAL for ty in context.values()):
        raise ContractError("normalize needs a context of real variables")
    names = list(context)
    core = to_core(term, names)
    logger.debug(f"core term: {pretty_core(core)}")
    if not names:
        nf = normalize_closed(core)
        out = ClosedNormalFormOut.from_normal_form(nf)
        text = pretty_core(nf.to_core())
        if not nf.is_bot:
            text += f"\nmean = {_fmt(nf.c)}\ncov  =\n{_fmt(nf.A @ nf.A.T)}"
    elif term.ty == vector_type(0):
        nf = normalize_effect(core, names)
        out = EffectOut.from_normal_form(nf)
        text = "⊥" if nf.is_bot else f"A =\n{_fmt(nf.A)}\nc = {_fmt(nf.c)}\nS =\n{_fmt(nf.S)}"
    else:
        raise ContractError(f"open programs normalise only at type I, got {term.ty}")
    print(out.model_dump_json(indent=2) if args.json else text)
    return EXIT_BOT if nf.is_bot else EXIT_OK


def _param(item: str) -> tuple[str, str]:
    key, sep, value = item.partition("=")
    if not sep or not key:
        raise ContractError(f"bad --param {item!r}; expected k=v")
    return key.strip(), value.strip()


def cmd_example(args) -> int:
    spec = ExampleSpec(name=args.name, params=dict(_param(p) for p in args.param))
    output = build_example(spec)
    for path in write_example(output, args.out):
        print(path)
    return EXIT_BOT if output.summary.status == "bot" else EXIT_OK


# -------------------------------------------------------------------
# Entry point
# -------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gausslang", description="Gaussian programs with exact conditioning")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a closed program and print its posterior")
    p.add_argument("file")
    p.add_argument("--trace", action="store_true", help="record every reduction step")
    p.add_argument("--json", action="store_true")
    p.add_argument("--context", help="typing context, e.g. 'x,y,v:3' (default: free variables of type R)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("equiv", help="decide contextual equivalence of two programs")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--json", action="store_true")
    p.add_argument("--context")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("normalize", help="print the normal form of a program")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--context")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("example", help="write prior/posterior statistics of a worked example as CSV")
    p.add_argument("name", choices=["kriging", "randomwalk", "kalman", "ridge"])
    p.add_argument("--param", action="append", default=[], metavar="K=V")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_example)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, TypeCheckError, ContractError, ConfigError, ValidationError) as e:
        print(f"{args.command}: error: {e}", file=sys.stderr)
    except GaussLangError as e:
        logger.exception(f"{args.command} failed")
        print(f"{args.command}: error: {e}", file=sys.stderr)
    except RecursionError:
        # type equality and value expressions still recurse on very deep input
        logger.debug(f"{args.command} ran out of stack", exc_info=True)
        print(f"{args.command}: error: program is nested too deeply", file=sys.stderr)
    return EXIT_STATIC
