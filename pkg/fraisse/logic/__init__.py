"""Formulas, the s-expression grammar and evaluation.

Axiom generation lives in ``fraisse.logic.axioms`` and is imported
explicitly, since it depends on level enumeration.
"""

from fraisse.logic.syntax import Atom, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or, And, Var, Sentence
from fraisse.logic.parser import parse_formula, parse_sentence
from fraisse.logic.evaluate import evaluate, satisfies

__all__ = [
    "And", "Atom", "Eq", "Exists", "Forall", "Formula", "Iff", "Implies", "Not", "Or", "Var", "Sentence",
    "parse_formula", "parse_sentence", "evaluate", "satisfies",
]
