"""Recursive-descent parser for the formula language.

Grammar::

    formula := 'inf' VAR '.' formula | 'sup' VAR '.' formula | expr
    expr    := term2 (('+' | '-' | '-.') term2)*
    term2   := RAT '*' term2 | prim
    prim    := '|' formula '|' | 'max(' formula ',' formula ')'
             | 'min(' formula ',' formula ')' | 'm(' term ')'
             | 'd(' term ',' term ')' | RAT | '(' formula ')'
    term    := factor (('\\/' | '/\\' | '(+)') factor)*
    factor  := VAR | '0' | '1' | '(' term ')'
    RAT     := integer | integer '/' positive-integer

Binary operators associate to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .syntax import (KEYWORDS, Abs, Add, AtomD, AtomM, Const, Formula, Inf, Join, Max, Meet,
                     Min, Monus, One, Scale, Sub, Sup, SymDiff, Term, Var, Zero)


class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str):
        super().__init__(f"{message} at position {pos}: {text[:pos]}⟨here⟩{text[pos:]}")
        self.pos = pos


@dataclass
class Token:
    kind: str
    text: str
    pos: int


_TOKEN_SPEC = [
    ("WS", r"\s+"),
    ("SYMDIFF", r"\(\+\)"),
    ("JOIN", r"\\/"),
    ("MEET", r"/\\"),
    ("MONUS", r"-\."),
    ("RAT", r"\d+(?:/\d+)?"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"[-+*|.,()]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{k}>{p})" for k, p in _TOKEN_SPEC))


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "WS":
            tok = m.group()
            if kind == "RAT" and tok.partition("/")[2].strip("0") == "" and "/" in tok:
                raise ParseError("zero denominator", pos, text)
            out.append(Token(kind if kind != "OP" else tok, tok, pos))
        pos = m.end()
    out.append(Token("EOF", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str):
        raise ParseError(msg, self.tok.pos, self.text)

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.error(f"expected {kind!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def accept(self, kind: str) -> bool:
        if self.tok.kind == kind:
            self.i += 1
            return True
        return False

    # formulas

    def formula(self) -> Formula:
        t = self.tok
        if t.kind == "IDENT" and t.text in ("inf", "sup"):
            self.i += 1
            var = self.expect("IDENT")
            if var.text in KEYWORDS:
                raise ParseError(f"keyword {var.text!r} used as a variable", var.pos, self.text)
            self.expect(".")
            body = self.formula()
            return (Inf if t.text == "inf" else Sup)(var.text, body)
        return self.expr()

    def expr(self) -> Formula:
        f = self.term2()
        while self.tok.kind in ("+", "-", "MONUS"):
            op = self.tok.kind
            self.i += 1
            g = self.term2()
            f = {"+": Add, "-": Sub, "MONUS": Monus}[op](f, g)
        return f

    def term2(self) -> Formula:
        if self.tok.kind == "RAT" and self.peek().kind == "*":
            r = _rat(self.tok.text)
            self.i += 2
            return Scale(r, self.term2())
        return self.prim()

    def prim(self) -> Formula:
        t = self.tok
        if t.kind == "|":
            self.i += 1
            f = self.formula()
            self.expect("|")
            return Abs(f)
        if t.kind == "IDENT" and self.peek().kind == "(":
            name = t.text
            if name in ("max", "min"):
                self.i += 2
                a = self.formula()
                self.expect(",")
                b = self.formula()
                self.expect(")")
                return (Max if name == "max" else Min)(a, b)
            if name == "m":
                self.i += 2
                a = self.term()
                self.expect(")")
                return AtomM(a)
            if name == "d":
                self.i += 2
                a = self.term()
                self.expect(",")
                b = self.term()
                self.expect(")")
                return AtomD(a, b)
        if t.kind == "RAT":
            self.i += 1
            return Const(_rat(t.text))
        if t.kind == "(":
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        self.error(f"unexpected {t.text or 'end of input'!r}")

    # terms

    def term(self) -> Term:
        t = self.factor()
        while self.tok.kind in ("JOIN", "MEET", "SYMDIFF"):
            op = self.tok.kind
            self.i += 1
            u = self.factor()
            t = {"JOIN": Join, "MEET": Meet, "SYMDIFF": SymDiff}[op](t, u)
        return t

    def factor(self) -> Term:
        t = self.tok
        if t.kind == "IDENT":
            if t.text in KEYWORDS:
                self.error(f"keyword {t.text!r} used as a variable")
            self.i += 1
            return Var(t.text)
        if t.kind == "RAT" and t.text in ("0", "1"):
            self.i += 1
            return Zero() if t.text == "0" else One()
        if t.kind == "(":
            self.i += 1
            u = self.term()
            self.expect(")")
            return u
        self.error(f"expected a term, found {t.text or 'end of input'!r}")


def _rat(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den) if den else 1)


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.tok.kind != "EOF":
        p.error(f"trailing input {p.tok.text!r}")
    return f


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    if p.tok.kind != "EOF":
        p.error(f"trailing input {p.tok.text!r}")
    return t
