"""
First-order formulas over a multi-sorted relational signature.

Formulas are immutable dataclasses. Terms are sorted variables only; the
empty conjunction is ``TRUE`` and the empty disjunction ``FALSE``.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, Tuple

from fraisse.errors import FormulaError, SignatureMismatchError
from fraisse.structures.signature import Signature

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Var:
    name: str
    sort: str

    def __str__(self):
        return self.name


class Formula:
    """Base class of the formula AST."""

    def children(self) -> Tuple["Formula", ...]:
        return ()

    def __str__(self):
        return to_sexpr(self)


@dataclass(frozen=True)
class Atom(Formula):
    relation: str
    args: Tuple[Var, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: Var
    right: Var


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class And(Formula):
    parts: Tuple[Formula, ...]

    def children(self):
        return self.parts


@dataclass(frozen=True)
class Or(Formula):
    parts: Tuple[Formula, ...]

    def children(self):
        return self.parts


@dataclass(frozen=True)
class Implies(Formula):
    antecedent: Formula
    consequent: Formula

    def children(self):
        return (self.antecedent, self.consequent)


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula

    def children(self):
        return (self.body,)


TRUE = And(())
FALSE = Or(())

Sentence = Formula


@dataclass(frozen=True)
class OpenFormula:
    """A formula together with the ordered tuple of its free variables."""

    formula: Formula
    variables: Tuple[Var, ...]


def forall(variables: Iterable[Var], body: Formula) -> Formula:
    for var in reversed(list(variables)):
        body = Forall(var, body)
    return body


def exists(variables: Iterable[Var], body: Formula) -> Formula:
    for var in reversed(list(variables)):
        body = Exists(var, body)
    return body


def distinct(variables: Iterable[Var]) -> Formula:
    """Pairwise inequalities between same-sort variables."""
    variables = list(variables)
    parts = []
    for i, first in enumerate(variables):
        for second in variables[i + 1:]:
            if first.sort == second.sort:
                parts.append(Not(Eq(first, second)))
    return And(tuple(parts))


def walk(formula: Formula) -> Iterator[Formula]:
    yield formula
    for child in formula.children():
        yield from walk(child)


def free_variables(formula: Formula) -> FrozenSet[Var]:
    if isinstance(formula, Atom):
        return frozenset(formula.args)
    if isinstance(formula, Eq):
        return frozenset((formula.left, formula.right))
    if isinstance(formula, (Forall, Exists)):
        return free_variables(formula.body) - {formula.var}
    result = frozenset()
    for child in formula.children():
        result |= free_variables(child)
    return result


def quantifier_depth(formula: Formula) -> int:
    inner = max((quantifier_depth(c) for c in formula.children()), default=0)
    return inner + 1 if isinstance(formula, (Forall, Exists)) else inner


def variable_count(formula: Formula) -> int:
    names = set()
    for node in walk(formula):
        if isinstance(node, (Forall, Exists)):
            names.add(node.var)
        elif isinstance(node, Atom):
            names.update(node.args)
        elif isinstance(node, Eq):
            names.update((node.left, node.right))
    return len(names)


def relations_used(formula: Formula) -> FrozenSet[str]:
    return frozenset(node.relation for node in walk(formula) if isinstance(node, Atom))


def check_sorts(formula: Formula, signature: Signature):
    """Raise unless every atom and equality is well-sorted for ``signature``."""
    for node in walk(formula):
        if isinstance(node, Atom):
            if not signature.has_relation(node.relation):
                raise SignatureMismatchError(f"Unknown relation {node.relation!r} in formula")
            profile = signature.relation(node.relation).profile
            if len(node.args) != len(profile):
                raise FormulaError(
                    f"{node.relation} takes {len(profile)} arguments, got {len(node.args)}"
                )
            for var, sort in zip(node.args, profile):
                if var.sort != sort:
                    raise FormulaError(
                        f"Variable {var.name} of sort {var.sort} used where {node.relation} expects {sort}"
                    )
        elif isinstance(node, Eq):
            if node.left.sort != node.right.sort:
                raise FormulaError(f"Equality between sorts {node.left.sort} and {node.right.sort}")
        elif isinstance(node, (Forall, Exists)):
            if node.var.sort not in signature.sorts:
                raise FormulaError(f"Variable {node.var.name} has unknown sort {node.var.sort}")
    names = {}
    for node in walk(formula):
        vars_here = ()
        if isinstance(node, (Forall, Exists)):
            vars_here = (node.var,)
        elif isinstance(node, Atom):
            vars_here = node.args
        elif isinstance(node, Eq):
            vars_here = (node.left, node.right)
        for var in vars_here:
            if names.setdefault(var.name, var.sort) != var.sort:
                raise FormulaError(f"Variable {var.name} used with two sorts")


def strip_universal(formula: Formula) -> Tuple[Tuple[Var, ...], Formula]:
    """Split a leading block of universal quantifiers from the matrix."""
    prefix = []
    while isinstance(formula, Forall):
        prefix.append(formula.var)
        formula = formula.body
    return tuple(prefix), formula


def to_sexpr(formula: Formula) -> str:
    """Render in the s-expression grammar accepted by the parser."""
    if isinstance(formula, Atom):
        return "(" + " ".join([formula.relation, *(v.name for v in formula.args)]) + ")"
    if isinstance(formula, Eq):
        return f"(= {formula.left.name} {formula.right.name})"
    if isinstance(formula, Not):
        return f"(not {to_sexpr(formula.body)})"
    if isinstance(formula, And):
        if not formula.parts:
            return "true"
        return "(and " + " ".join(to_sexpr(p) for p in formula.parts) + ")"
    if isinstance(formula, Or):
        if not formula.parts:
            return "false"
        return "(or " + " ".join(to_sexpr(p) for p in formula.parts) + ")"
    if isinstance(formula, Implies):
        return f"(implies {to_sexpr(formula.antecedent)} {to_sexpr(formula.consequent)})"
    if isinstance(formula, Iff):
        return f"(iff {to_sexpr(formula.left)} {to_sexpr(formula.right)})"
    if isinstance(formula, Forall):
        return f"(forall ({formula.var.name} {formula.var.sort}) {to_sexpr(formula.body)})"
    if isinstance(formula, Exists):
        return f"(exists ({formula.var.name} {formula.var.sort}) {to_sexpr(formula.body)})"
    raise FormulaError(f"Not a formula: {formula!r}")
