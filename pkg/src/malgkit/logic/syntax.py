"""Terms and formulas of continuous logic over the measure-algebra signature.

Terms are built from variables, the constants 0 and 1 and the binary
operations join, meet and symmetric difference.  Formulas are built from
``m(t)`` and ``d(t, t')`` with Lipschitz connectives (sums, differences,
truncated subtraction, absolute value, max, min, scaling by a non-negative
rational) and the quantifiers ``inf`` and ``sup``.  Products of formulas are
deliberately absent: every formula keeps a finite Lipschitz modulus.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

VAR_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
KEYWORDS = frozenset({"inf", "sup", "max", "min"})


def _check_name(name: str) -> None:
    if not VAR_RE.fullmatch(name) or name in KEYWORDS:
        raise ValueError(f"bad variable name {name!r}")


# terms ---------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        _check_name(self.name)


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Join:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Meet:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class SymDiff:
    left: "Term"
    right: "Term"


Term = Union[Var, Zero, One, Join, Meet, SymDiff]


# formulas ------------------------------------------------------------------


def _nonneg(value) -> Fraction:
    value = Fraction(value)
    if value < 0:
        raise ValueError("constants and scale factors are non-negative; use subtraction")
    return value


@dataclass(frozen=True)
class AtomM:
    term: Term


@dataclass(frozen=True)
class AtomD:
    left: Term
    right: Term


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", _nonneg(self.value))


@dataclass(frozen=True)
class Add:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Sub:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Monus:
    """Truncated subtraction max(left - right, 0)."""

    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Abs:
    body: "Formula"


@dataclass(frozen=True)
class Max:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Min:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Scale:
    factor: Fraction
    body: "Formula"

    def __post_init__(self):
        object.__setattr__(self, "factor", _nonneg(self.factor))


@dataclass(frozen=True)
class Inf:
    var: str
    body: "Formula"

    def __post_init__(self):
        _check_name(self.var)


@dataclass(frozen=True)
class Sup:
    var: str
    body: "Formula"

    def __post_init__(self):
        _check_name(self.var)


Formula = Union[AtomM, AtomD, Const, Add, Sub, Monus, Abs, Max, Min, Scale, Inf, Sup]
BINARY = {Add: "+", Sub: "-", Monus: "-."}
QUANTIFIERS = (Inf, Sup)


# free variables ------------------------------------------------------------


def term_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, (Zero, One)):
        return frozenset()
    return term_vars(t.left) | term_vars(t.right)


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, AtomM):
        return term_vars(f.term)
    if isinstance(f, AtomD):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, (Abs, Scale)):
        return free_vars(f.body)
    if isinstance(f, QUANTIFIERS):
        return free_vars(f.body) - {f.var}
    return free_vars(f.left) | free_vars(f.right)


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, QUANTIFIERS):
        return False
    if isinstance(f, (AtomM, AtomD, Const)):
        return True
    if isinstance(f, (Abs, Scale)):
        return is_quantifier_free(f.body)
    return is_quantifier_free(f.left) and is_quantifier_free(f.right)


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


# printing ------------------------------------------------------------------


def term_to_text(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, One):
        return "1"
    op = {Join: "\\/", Meet: "/\\", SymDiff: "(+)"}[type(t)]
    return f"({term_to_text(t.left)} {op} {term_to_text(t.right)})"


def _term_top(t: Term) -> str:
    # outermost parentheses are redundant inside m(...) and d(...)
    s = term_to_text(t)
    return s[1:-1] if s.startswith("(") and not isinstance(t, (Var, Zero, One)) else s


def to_text(f: Formula) -> str:
    """Concrete syntax that parses back to the same tree."""
    if isinstance(f, QUANTIFIERS):
        q = "inf" if isinstance(f, Inf) else "sup"
        return f"{q} {f.var} . {to_text(f.body)}"
    return _prim(f)


def _prim(f: Formula) -> str:
    if isinstance(f, QUANTIFIERS):
        return f"({to_text(f)})"
    if isinstance(f, AtomM):
        return f"m({_term_top(f.term)})"
    if isinstance(f, AtomD):
        return f"d({_term_top(f.left)}, {_term_top(f.right)})"
    if isinstance(f, Const):
        return str(f.value)
    if isinstance(f, Abs):
        return f"|{to_text(f.body)}|"
    if isinstance(f, (Max, Min)):
        name = "max" if isinstance(f, Max) else "min"
        return f"{name}({to_text(f.left)}, {to_text(f.right)})"
    if isinstance(f, Scale):
        return f"({f.factor} * {_prim(f.body)})"
    op = BINARY[type(f)]
    return f"({_prim(f.left)} {op} {_prim(f.right)})"


# Lipschitz moduli ----------------------------------------------------------


def term_modulus(t: Term) -> dict[str, Fraction]:
    """Lipschitz constant of a term in each variable (counts occurrences)."""
    if isinstance(t, Var):
        return {t.name: Fraction(1)}
    if isinstance(t, (Zero, One)):
        return {}
    return _add_moduli(term_modulus(t.left), term_modulus(t.right))


def _add_moduli(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, Fraction(0)) + v
    return out


def _max_moduli(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k] = max(out.get(k, Fraction(0)), v)
    return out


def modulus(f: Formula) -> dict[str, Fraction]:
    """Per-free-variable K with |f(..x..) - f(..x'..)| ≤ K d(x, x').

    Sums and differences add constants; scaling multiplies; max, min and
    absolute value keep the larger one; truncated subtraction adds (it is
    only as regular as the difference it truncates); quantifiers drop the
    bound variable.
    """
    if isinstance(f, AtomM):
        return term_modulus(f.term)
    if isinstance(f, AtomD):
        return _add_moduli(term_modulus(f.left), term_modulus(f.right))
    if isinstance(f, Const):
        return {}
    if isinstance(f, Abs):
        return modulus(f.body)
    if isinstance(f, Scale):
        return {k: f.factor * v for k, v in modulus(f.body).items()}
    if isinstance(f, QUANTIFIERS):
        return {k: v for k, v in modulus(f.body).items() if k != f.var}
    if isinstance(f, (Max, Min)):
        return _max_moduli(modulus(f.left), modulus(f.right))
    return _add_moduli(modulus(f.left), modulus(f.right))


# static range --------------------------------------------------------------


def value_range(f: Formula) -> tuple[Fraction, Fraction]:
    """Interval containing every interpretation of f in a probability algebra."""
    if isinstance(f, (AtomM, AtomD)):
        return Fraction(0), Fraction(1)
    if isinstance(f, Const):
        return f.value, f.value
    if isinstance(f, QUANTIFIERS):
        return value_range(f.body)
    if isinstance(f, Scale):
        lo, hi = value_range(f.body)
        return f.factor * lo, f.factor * hi
    if isinstance(f, Abs):
        lo, hi = value_range(f.body)
        if lo >= 0:
            return lo, hi
        if hi <= 0:
            return -hi, -lo
        return Fraction(0), max(-lo, hi)
    a, b = value_range(f.left), value_range(f.right)
    if isinstance(f, Add):
        return a[0] + b[0], a[1] + b[1]
    if isinstance(f, Sub):
        return a[0] - b[1], a[1] - b[0]
    if isinstance(f, Monus):
        return max(a[0] - b[1], Fraction(0)), max(a[1] - b[0], Fraction(0))
    if isinstance(f, Max):
        return max(a[0], b[0]), max(a[1], b[1])
    return min(a[0], b[0]), min(a[1], b[1])
