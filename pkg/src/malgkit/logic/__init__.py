"""Continuous-logic formulas over the measure-algebra signature."""

from .parser import ParseError, parse, parse_term, tokenize
from .semantics import (ATOMLESS, DEPTH_CAP, DIAMETER, BoundsReport, BoundsValue, EvalError,
                        SearchStats, benchmark_law, eval_at_depth, eval_bounds, natural_key,
                        qf_eval)
from .syntax import (Abs, Add, AtomD, AtomM, Const, Formula, Inf, Join, Max, Meet, Min, Monus,
                     One, Scale, Sub, Sup, SymDiff, Term, Var, Zero, free_vars,
                     is_quantifier_free, is_sentence, modulus, term_to_text, to_text,
                     value_range)

__all__ = [
    "ParseError", "parse", "parse_term", "tokenize",
    "ATOMLESS", "DEPTH_CAP", "DIAMETER", "BoundsReport", "BoundsValue", "EvalError",
    "SearchStats", "benchmark_law", "eval_at_depth", "eval_bounds", "natural_key", "qf_eval",
    "Abs", "Add", "AtomD", "AtomM", "Const", "Formula", "Inf", "Join", "Max", "Meet", "Min",
    "Monus", "One", "Scale", "Sub", "Sup", "SymDiff", "Term", "Var", "Zero", "free_vars",
    "is_quantifier_free", "is_sentence", "modulus", "term_to_text", "to_text", "value_range",
]
