"""
Tarskian evaluation on finite structures.

Formulas are compiled once per structure into nested closures over an
environment list (one slot per variable occurrence scope). Quantifiers loop
over the sort's elements with early exit; an existential whose body is a
conjunction containing ``y = x`` for an outer ``x`` tries only that value.
"""

import logging
from itertools import product
from typing import Callable, Dict, List, Mapping, Optional, Sequence

from fraisse.errors import FormulaError
from fraisse.logic.syntax import (
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
    strip_universal,
)
from fraisse.structures.structure import FinStructure

logger = logging.getLogger(__name__)

Compiled = Callable[[List[int]], bool]


class _Compiler:
    def __init__(self, M: FinStructure):
        self.M = M
        self.slot_count = 0

    def new_slot(self) -> int:
        slot = self.slot_count
        self.slot_count += 1
        return slot

    def compile(self, formula: Formula, slots: Dict[Var, int]) -> Compiled:
        if isinstance(formula, Atom):
            return self._atom(formula, slots)
        if isinstance(formula, Eq):
            a, b = slots[formula.left], slots[formula.right]
            return lambda env: env[a] == env[b]
        if isinstance(formula, Not):
            body = self.compile(formula.body, slots)
            return lambda env: not body(env)
        if isinstance(formula, And):
            parts = [self.compile(p, slots) for p in formula.parts]
            if len(parts) == 2:
                first, second = parts
                return lambda env: first(env) and second(env)
            return lambda env: all(p(env) for p in parts)
        if isinstance(formula, Or):
            parts = [self.compile(p, slots) for p in formula.parts]
            if len(parts) == 2:
                first, second = parts
                return lambda env: first(env) or second(env)
            return lambda env: any(p(env) for p in parts)
        if isinstance(formula, Implies):
            antecedent = self.compile(formula.antecedent, slots)
            consequent = self.compile(formula.consequent, slots)
            return lambda env: (not antecedent(env)) or consequent(env)
        if isinstance(formula, Iff):
            left = self.compile(formula.left, slots)
            right = self.compile(formula.right, slots)
            return lambda env: left(env) == right(env)
        if isinstance(formula, (Forall, Exists)):
            return self._quantifier(formula, slots)
        raise FormulaError(f"Cannot evaluate {formula!r}")

    def _atom(self, formula: Atom, slots: Dict[Var, int]) -> Compiled:
        fact_set = self.M.fact_set(formula.relation)
        indices = tuple(slots[v] for v in formula.args)
        if len(indices) == 1:
            (a,) = indices
            return lambda env: (env[a],) in fact_set
        if len(indices) == 2:
            a, b = indices
            return lambda env: (env[a], env[b]) in fact_set
        if len(indices) == 3:
            a, b, c = indices
            return lambda env: (env[a], env[b], env[c]) in fact_set
        return lambda env: tuple(env[i] for i in indices) in fact_set

    def _quantifier(self, formula, slots: Dict[Var, int]) -> Compiled:
        slot = self.new_slot()
        inner = dict(slots)
        inner[formula.var] = slot
        body = self.compile(formula.body, inner)
        size = self.M.size_of(formula.var.sort)
        if isinstance(formula, Forall):
            def forall_(env):
                for value in range(size):
                    env[slot] = value
                    if not body(env):
                        return False
                return True
            return forall_

        pinned = _pinned_equality(formula, slots)
        if pinned is not None:
            def exists_pinned(env):
                env[slot] = env[pinned]
                return body(env)
            return exists_pinned

        def exists_(env):
            for value in range(size):
                env[slot] = value
                if body(env):
                    return True
            return False
        return exists_


def _pinned_equality(formula: Exists, slots: Dict[Var, int]) -> Optional[int]:
    """Slot of an outer variable the witness is forced to equal, if any."""
    body = formula.body
    parts = body.parts if isinstance(body, And) else (body,)
    for part in parts:
        if isinstance(part, Eq):
            if part.left == formula.var and part.right in slots and part.right != formula.var:
                return slots[part.right]
            if part.right == formula.var and part.left in slots and part.left != formula.var:
                return slots[part.left]
    return None


def compile_formula(M: FinStructure, formula: Formula, variables: Sequence[Var] = ()):
    """Compile against M; returns ``(function, env_size)`` with ``variables`` in slots 0..k-1."""
    compiler = _Compiler(M)
    slots = {var: compiler.new_slot() for var in variables}
    function = compiler.compile(formula, slots)
    return function, compiler.slot_count


def evaluate(M: FinStructure, sentence: Formula) -> bool:
    """Truth value of a closed, well-sorted sentence in M."""
    check_sorts(sentence, M.signature)
    if free_variables(sentence):
        names = sorted(v.name for v in free_variables(sentence))
        raise FormulaError(f"Cannot evaluate an open formula (free: {', '.join(names)})")
    function, size = compile_formula(M, sentence)
    return function([0] * max(size, 1))


def satisfies(M: FinStructure, formula: Formula, assignment: Mapping[Var, int]) -> bool:
    """Truth of an open formula under an assignment of its free variables."""
    check_sorts(formula, M.signature)
    missing = free_variables(formula) - set(assignment)
    if missing:
        raise FormulaError(f"Unassigned variables: {sorted(v.name for v in missing)}")
    variables = list(assignment)
    for var in variables:
        if not 0 <= assignment[var] < M.size_of(var.sort):
            raise ValueError(f"Value {assignment[var]} out of range for {var.name}:{var.sort}")
    function, size = compile_formula(M, formula, variables)
    env = [0] * max(size, 1)
    for slot, var in enumerate(variables):
        env[slot] = assignment[var]
    return function(env)


def universal_counterexample(M: FinStructure, sentence: Formula, covering: bool = False) -> Optional[Dict[Var, int]]:
    """First assignment of the leading universal block that falsifies the matrix.

    With ``covering`` only assignments whose values hit every element of M
    are tried (used for per-support checks on small structures).
    """
    variables, matrix = strip_universal(sentence)
    function, size = compile_formula(M, matrix, variables)
    env = [0] * max(size, 1)
    sort_positions = [M.signature.sort_index(v.sort) for v in variables]
    everything = set(M.elements()) if covering else None
    ranges = [range(M.sizes[s]) for s in sort_positions]
    for values in product(*ranges):
        if covering and {(s, v) for s, v in zip(sort_positions, values)} != everything:
            continue
        env[: len(values)] = values
        if not function(env):
            return dict(zip(variables, values))
    return None
