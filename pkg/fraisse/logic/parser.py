"""
S-expression grammar for formulas.

    formula := (forall BINDER formula) | (exists BINDER formula)
             | (and formula*) | (or formula*) | (not formula)
             | (implies formula formula) | (iff formula formula)
             | (= x y) | (R x1 ... xk) | true | false
    BINDER  := (x Sort) | ((x Sort) (y Sort) ...) | x

A bare variable binder takes the only sort of a single-sorted signature.
"""

import logging
import re
from typing import Dict, List, Mapping, Optional, Union

from fraisse.errors import FormulaError
from fraisse.logic.syntax import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Iff,
    Implies,
    Not,
    Or,
    Var,
    check_sorts,
    free_variables,
)
from fraisse.structures.signature import Signature

logger = logging.getLogger(__name__)

KEYWORDS = {"forall", "exists", "and", "or", "not", "implies", "iff", "=", "true", "false"}

_TOKEN = re.compile(r"\(|\)|[^\s()]+")

SExpr = Union[str, List["SExpr"]]


def _tokenize(text: str) -> List[str]:
    return _TOKEN.findall(text)


def _read(tokens: List[str], position: int):
    if position >= len(tokens):
        raise FormulaError("Unexpected end of input")
    token = tokens[position]
    if token == ")":
        raise FormulaError("Unexpected ')'")
    if token != "(":
        return token, position + 1
    items = []
    position += 1
    while True:
        if position >= len(tokens):
            raise FormulaError("Missing ')'")
        if tokens[position] == ")":
            return items, position + 1
        item, position = _read(tokens, position)
        items.append(item)


def read_sexpr(text: str) -> SExpr:
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaError("Empty formula")
    tree, position = _read(tokens, 0)
    if position != len(tokens):
        raise FormulaError(f"Trailing input after formula: {' '.join(tokens[position:])}")
    return tree


class _Parser:
    def __init__(self, signature: Optional[Signature]):
        self.signature = signature

    def default_sort(self) -> str:
        if self.signature is None or not self.signature.is_single_sorted():
            raise FormulaError("Binder without a sort needs a single-sorted signature")
        return self.signature.sorts[0]

    def binders(self, spec: SExpr) -> List[Var]:
        if isinstance(spec, str):
            return [Var(spec, self.default_sort())]
        if len(spec) == 2 and all(isinstance(x, str) for x in spec):
            bare_pair = (
                self.signature is not None
                and self.signature.is_single_sorted()
                and spec[1] not in self.signature.sorts
            )
            if not bare_pair:
                return [Var(spec[0], spec[1])]
        result = []
        for item in spec:
            if isinstance(item, str):
                result.append(Var(item, self.default_sort()))
            elif len(item) == 2 and all(isinstance(x, str) for x in item):
                result.append(Var(item[0], item[1]))
            else:
                raise FormulaError(f"Malformed binder: {item!r}")
        if not result:
            raise FormulaError("Empty binder list")
        return result

    def variable(self, name: SExpr, scope: Dict[str, Var]) -> Var:
        if not isinstance(name, str):
            raise FormulaError(f"Expected a variable, got {name!r}")
        if name not in scope:
            raise FormulaError(f"Unbound variable {name!r}")
        return scope[name]

    def formula(self, tree: SExpr, scope: Dict[str, Var]) -> Formula:
        if isinstance(tree, str):
            if tree == "true":
                return TRUE
            if tree == "false":
                return FALSE
            raise FormulaError(f"Unexpected token {tree!r}")
        if not tree or not isinstance(tree[0], str):
            raise FormulaError(f"Malformed formula: {tree!r}")
        head, rest = tree[0], tree[1:]
        if head in ("forall", "exists"):
            if len(rest) != 2:
                raise FormulaError(f"{head} takes a binder and a body")
            variables = self.binders(rest[0])
            inner = dict(scope)
            for var in variables:
                inner[var.name] = var
            body = self.formula(rest[1], inner)
            node = Forall if head == "forall" else Exists
            for var in reversed(variables):
                body = node(var, body)
            return body
        if head == "and":
            return And(tuple(self.formula(x, scope) for x in rest))
        if head == "or":
            return Or(tuple(self.formula(x, scope) for x in rest))
        if head == "not":
            if len(rest) != 1:
                raise FormulaError("not takes one argument")
            return Not(self.formula(rest[0], scope))
        if head in ("implies", "iff"):
            if len(rest) != 2:
                raise FormulaError(f"{head} takes two arguments")
            left, right = self.formula(rest[0], scope), self.formula(rest[1], scope)
            return Implies(left, right) if head == "implies" else Iff(left, right)
        if head == "=":
            if len(rest) != 2:
                raise FormulaError("= takes two variables")
            return Eq(self.variable(rest[0], scope), self.variable(rest[1], scope))
        if head in ("true", "false"):
            raise FormulaError(f"{head} takes no arguments")
        return Atom(head, tuple(self.variable(x, scope) for x in rest))


def parse_formula(
    text: str,
    signature: Optional[Signature] = None,
    free: Optional[Mapping[str, str]] = None,
) -> Formula:
    """Parse a formula; ``free`` maps free variable names to sorts."""
    scope = {name: Var(name, sort) for name, sort in (free or {}).items()}
    formula = _Parser(signature).formula(read_sexpr(text), scope)
    if signature is not None:
        check_sorts(formula, signature)
    return formula


def parse_sentence(text: str, signature: Optional[Signature] = None) -> Formula:
    """Parse a closed formula."""
    formula = parse_formula(text, signature)
    if free_variables(formula):
        raise FormulaError("Sentence has free variables")
    return formula
