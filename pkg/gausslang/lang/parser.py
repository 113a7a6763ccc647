# gausslang/lang/parser.py
"""
Lexer and recursive-descent parser.

    expr   := "let" pat "=" expr "in" expr | cond (";" expr)?
    pat    := ident | "(" ident "," ident ")"
    cond   := sum ("=:=" sum)?
    sum    := prod (("+" | "-") prod)*
    prod   := unary (("·" | "*") prod)?         left factor: number or matrix literal
    unary  := "-" number | "-" unary | atom
    atom   := ident | number | "(" ")" | "(" expr ("," expr)* ")"
            | "[" expr ("," expr)* "]" | "[" "[" numbers "]" ("," "[" numbers "]")* "]"
            | "normal" "(" ")" | "normal" "(" expr "," (number | matrix) ")"
            | "observe" "(" expr "," expr ")"

`#` starts a comment running to the end of the line.
"""
import logging
import re
from dataclasses import dataclass, replace
from typing import Callable, Optional

from ..errors import ParseError
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
    Scale,
    Seq,
    Sub,
    Term,
    Unit,
    Var,
    tuple_term,
)

logger = logging.getLogger(__name__)

KEYWORDS = {"let", "in", "normal", "observe"}

TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>=:=|·|[-+*=;,()\[\]])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number, ident, keyword, op, eof
    text: str
    line: int
    column: int

    @property
    def loc(self) -> tuple[int, int]:
        return self.line, self.column


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        column = pos - line_start + 1
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            tokens.append(Token("keyword" if text in KEYWORDS else "ident", text, line, column))
        elif kind in ("number", "op"):
            tokens.append(Token(kind, "·" if text == "*" else text, line, column))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    # ---- token helpers ----
    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def lookahead(self, n: int = 1) -> Token:
        return self.tokens[min(self.pos + n, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        tok = self.peek
        return tok.kind in ("op", "keyword") and tok.text == text

    def advance(self) -> Token:
        tok = self.peek
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.line, tok.column)

    def ident(self, allow_wildcard: bool = False) -> str:
        tok = self.peek
        if tok.kind != "ident":
            self.fail("expected an identifier")
        if tok.text == WILDCARD and not allow_wildcard:
            self.fail("'_' can only be bound, not used")
        return self.advance().text

    def number(self) -> float:
        neg = False
        if self.at("-") and self.lookahead().kind == "number":
            self.advance()
            neg = True
        tok = self.peek
        if tok.kind != "number":
            self.fail("expected a number")
        self.advance()
        value = float(tok.text)
        return -value if neg else value

    # ---- grammar ----
    def program(self) -> Term:
        t = self.expr()
        if self.peek.kind != "eof":
            self.fail("unexpected trailing input")
        return t

    def expr(self) -> Term:
        # a chain of lets and statements is read in a loop and built inside out
        prefix: list[Callable[[Term], Term]] = []
        while True:
            tok = self.peek
            if self.at("let"):
                prefix.append(self._binder(tok))
                continue
            first = self.cond()
            if not self.at(";"):
                break
            semi = self.advance()
            prefix.append(lambda then, first=first, loc=semi.loc: Seq(first, then, loc=loc))
        out = first
        for wrap in reversed(prefix):
            out = wrap(out)
        return out

    def _binder(self, tok: Token) -> Callable[[Term], Term]:
        self.expect("let")
        if self.at("("):
            self.advance()
            left = self.ident(allow_wildcard=True)
            self.expect(",")
            right = self.ident(allow_wildcard=True)
            self.expect(")")
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            return lambda body: LetPair(left, right, bound, body, loc=tok.loc)
        name = self.ident(allow_wildcard=True)
        self.expect("=")
        bound = self.expr()
        self.expect("in")
        return lambda body: Let(name, bound, body, loc=tok.loc)

    def cond(self) -> Term:
        left = self.sum()
        if self.at("=:="):
            tok = self.advance()
            return Cond(left, self.sum(), loc=tok.loc)
        return left

    def sum(self) -> Term:
        t = self.prod()
        while self.at("+") or self.at("-"):
            tok = self.advance()
            right = self.prod()
            t = Add(t, right, loc=tok.loc) if tok.text == "+" else Sub(t, right, loc=tok.loc)
        return t

    def prod(self) -> Term:
        start = self.peek
        left = self.unary()
        if not self.at("·"):
            return left
        self.advance()
        right = self.prod()
        if isinstance(left, Const):
            return Scale(left.value, right, loc=start.loc)
        if isinstance(left, MatrixLit):
            return MatVec(left, right, loc=start.loc)
        self.fail("left factor of '·' must be a number or a matrix literal", start)

    def unary(self) -> Term:
        tok = self.peek
        if self.at("-"):
            if self.lookahead().kind == "number":
                return Const(self.number(), loc=tok.loc)
            self.advance()
            return Neg(self.unary(), loc=tok.loc)
        return self.atom()

    def atom(self) -> Term:
        tok = self.peek
        if tok.kind == "number":
            return Const(self.number(), loc=tok.loc)
        if tok.kind == "ident":
            return Var(self.ident(), loc=tok.loc)
        if self.at("normal"):
            return self.normal()
        if self.at("observe"):
            self.advance()
            self.expect("(")
            dist = self.expr()
            self.expect(",")
            target = self.expr()
            self.expect(")")
            return Observe(dist, target, loc=tok.loc)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return Unit(loc=tok.loc)
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect(")")
            return self._located(tuple_term(items), tok) if len(items) > 1 else items[0]
        if self.at("["):
            if self.lookahead().kind == "op" and self.lookahead().text == "[":
                return self.matrix()
            self.advance()
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect("]")
            return self._located(tuple_term(items), tok) if len(items) > 1 else items[0]
        self.fail("expected an expression")

    def normal(self) -> Term:
        tok = self.expect("normal")
        self.expect("(")
        if self.at(")"):
            self.advance()
            return Normal(loc=tok.loc)
        mean = self.expr()
        self.expect(",")
        variance = self.matrix() if self.at("[") else self.number()
        self.expect(")")
        return NormalParams(mean, variance, loc=tok.loc)

    def matrix(self) -> MatrixLit:
        tok = self.expect("[")
        rows = [self._row()]
        while self.at(","):
            self.advance()
            rows.append(self._row())
        self.expect("]")
        if len({len(r) for r in rows}) != 1:
            raise ParseError("matrix rows have different lengths", tok.line, tok.column)
        return MatrixLit(tuple(rows), loc=tok.loc)

    def _row(self) -> tuple[float, ...]:
        self.expect("[")
        row = [self.number()]
        while self.at(","):
            self.advance()
            row.append(self.number())
        self.expect("]")
        return tuple(row)

    @staticmethod
    def _located(t: Term, tok: Token) -> Term:
        return t if t.loc is not None else replace(t, loc=tok.loc)


def parse(source: str) -> Term:
    """Parse program text into a surface AST."""
    t = Parser(source).program()
    logger.debug(f"parsed program of {len(source)} characters")
    return t
