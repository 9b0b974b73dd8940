"""
Constraint kinds for class specs.

Every constraint answers ``check(M)`` with the first violation or None; that
is the authority on membership. Two optional hooks let enumeration prune
soundly before a full membership test:

* ``check_block(B)`` looks only at relation instances whose support is the
  whole domain of B (the other facts of B are absent) and returns False when
  every structure containing that block violates the constraint.
* ``derivation(signature, r, fact)`` returns ``(stage, rule)`` when the value
  of an instance is forced; ``rule(lookup)`` computes it from instances of a
  lower stage. Stage 0 rules ignore ``lookup``.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from fraisse.errors import FormulaError, SignatureMismatchError
from fraisse.logic.evaluate import universal_counterexample
from fraisse.logic.parser import parse_sentence
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
    check_sorts,
    free_variables,
    strip_universal,
    to_sexpr,
    walk,
)
from fraisse.structures import literal
from fraisse.structures.signature import Signature
from fraisse.structures.structure import Element, Fact, FinStructure, check_same_signature, iter_embeddings

logger = logging.getLogger(__name__)

Lookup = Callable[[int, Fact], bool]
Derivation = Tuple[int, Callable[[Lookup], bool]]


@dataclass(frozen=True)
class Violation:
    """A failed constraint with the elements that witness the failure."""

    constraint: str
    witness: Tuple[Element, ...]
    detail: str = ""

    def __str__(self):
        elements = ", ".join(f"{s}:{i}" for s, i in self.witness)
        text = f"{self.constraint} violated at ({elements})"
        return f"{text}: {self.detail}" if self.detail else text


class Constraint:
    """Base class; subclasses are frozen dataclasses."""

    kind = "constraint"

    def describe(self) -> str:
        return self.kind

    def relations(self) -> FrozenSet[str]:
        return frozenset()

    def validate(self, signature: Signature):
        """Raise ValueError when the constraint does not fit ``signature``."""

    def check(self, M: FinStructure) -> Optional[Violation]:
        raise NotImplementedError

    def width(self) -> int:
        """Most elements a single violation can involve."""
        return 0

    def check_block(self, B: FinStructure) -> bool:
        return True

    def block_relations(self) -> FrozenSet[str]:
        """Relations ``check_block`` reads."""
        return self.relations()

    def choice_groups(self, skeleton: FinStructure, free: Set[Tuple[int, Fact]]) -> List[List[Tuple[int, Fact]]]:
        """Groups of free block instances of which exactly one holds in every member."""
        return []

    def derivation(self, signature: Signature, r: int, fact: Fact) -> Optional[Derivation]:
        return None

    def to_dict(self) -> dict:
        raise ValueError(f"Constraint {self.describe()} has no file representation")


@dataclass(frozen=True)
class ForbiddenInduced(Constraint):
    """No induced substructure isomorphic to ``structure``."""

    structure: FinStructure
    label: str = ""

    kind = "forbidden-induced"

    def describe(self):
        return f"forbidden-induced({self.label or repr(self.structure)})"

    def relations(self):
        return frozenset(self.structure.signature.relation_names)

    def validate(self, signature):
        check_same_signature(self.structure.signature, signature, "forbidden structure")

    def check(self, M):
        for embedding in iter_embeddings(self.structure, M):
            return Violation(self.describe(), tuple(embedding.image()))
        return None

    def width(self):
        return self.structure.size

    def to_dict(self):
        return {"kind": self.kind, "label": self.label, "structure": literal.dumps(self.structure)}


def _atoms_cover_prefix(matrix: Formula, prefix) -> bool:
    variables = set(prefix)
    return all(set(node.args) == variables for node in walk(matrix) if isinstance(node, Atom))


def _is_quantifier_free(formula: Formula) -> bool:
    return not any(isinstance(node, (Forall, Exists)) for node in walk(formula))


def _is_distinctness(formula: Formula) -> bool:
    parts = formula.parts if isinstance(formula, And) else (formula,)
    return all(isinstance(p, Not) and isinstance(p.body, Eq) for p in parts)


@dataclass(frozen=True)
class _SentenceConstraint(Constraint):
    sentence: Formula
    label: str = ""

    def __post_init__(self):
        if free_variables(self.sentence):
            raise FormulaError(f"{self.kind} constraint must be a sentence")
        prefix, matrix = strip_universal(self.sentence)
        if not prefix:
            raise FormulaError(f"{self.kind} constraint needs a universal prefix")
        if not _is_quantifier_free(matrix):
            raise FormulaError(f"{self.kind} constraint matrix must be quantifier-free")
        self._check_shape(prefix, matrix)

    def _check_shape(self, prefix, matrix):
        raise NotImplementedError

    def describe(self):
        return f"{self.kind}({self.label or to_sexpr(self.sentence)})"

    def relations(self):
        return frozenset(node.relation for node in walk(self.sentence) if isinstance(node, Atom))

    def validate(self, signature):
        check_sorts(self.sentence, signature)

    def check(self, M):
        counterexample = universal_counterexample(M, self.sentence)
        if counterexample is None:
            return None
        prefix, _ = strip_universal(self.sentence)
        witness = []
        for var in prefix:
            element = (M.signature.sort_index(var.sort), counterexample[var])
            if element not in witness:
                witness.append(element)
        return Violation(self.describe(), tuple(witness))

    def width(self):
        prefix, _ = strip_universal(self.sentence)
        return len(prefix)

    def is_block_local(self) -> bool:
        prefix, matrix = strip_universal(self.sentence)
        return _atoms_cover_prefix(matrix, prefix)

    def check_block(self, B):
        if not self.is_block_local():
            return True
        return universal_counterexample(B, self.sentence, covering=True) is None

    def to_dict(self):
        return {"kind": self.kind, "label": self.label, "sentence": to_sexpr(self.sentence)}


class Parametric(_SentenceConstraint):
    """``forall x1..xn (distinct(x) -> phi)`` where every atom of phi mentions every xi."""

    kind = "parametric"

    def _check_shape(self, prefix, matrix):
        body = matrix
        if isinstance(matrix, Implies) and _is_distinctness(matrix.antecedent):
            body = matrix.consequent
        for node in walk(body):
            if isinstance(node, Eq):
                raise FormulaError("Parametric body may not contain equalities")
            if not isinstance(node, (Atom, Not, And, Or, Implies, Iff)):
                raise FormulaError(f"Parametric body must be a Boolean combination of atoms, found {node!r}")
        if not _atoms_cover_prefix(body, prefix):
            raise FormulaError("Every atom of a parametric sentence must mention every quantified variable")


class Local(_SentenceConstraint):
    """``forall x1..xn (R(x1..xn) -> psi)`` with psi quantifier-free."""

    kind = "local"

    def _check_shape(self, prefix, matrix):
        if not isinstance(matrix, Implies) or not isinstance(matrix.antecedent, Atom):
            raise FormulaError("Local sentence must have the form R(x...) -> psi")
        if set(matrix.antecedent.args) != set(prefix):
            raise FormulaError("The guard atom of a local sentence must mention every quantified variable")


@dataclass(frozen=True)
class Equivalence(Constraint):
    """An equivalence relation on k-tuples of objects, optionally one per parameter.

    The relation's profile is ``(parameter_sort,)? + (object_sort,) * 2k``.
    With ``redundant_class`` the tuples with a repeated coordinate form a
    single class of their own. ``max_classes`` bounds the number of classes
    of non-redundant tuples.
    """

    relation: str
    k: int = 1
    object_sort: str = "V"
    parameter_sort: Optional[str] = None
    redundant_class: bool = False
    max_classes: Optional[int] = None

    kind = "equivalence"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"Equivalence tuple arity must be positive, got {self.k}")
        if self.max_classes is not None and self.max_classes < 1:
            raise ValueError(f"max_classes must be positive, got {self.max_classes}")

    @property
    def offset(self) -> int:
        return 1 if self.parameter_sort is not None else 0

    def describe(self):
        bound = f", <= {self.max_classes} classes" if self.max_classes else ""
        return f"equivalence({self.relation} on {self.k}-tuples{bound})"

    def relations(self):
        return frozenset({self.relation})

    def expected_profile(self) -> Tuple[str, ...]:
        head = (self.parameter_sort,) if self.parameter_sort is not None else ()
        return head + (self.object_sort,) * (2 * self.k)

    def validate(self, signature):
        if not signature.has_relation(self.relation):
            raise SignatureMismatchError(f"Equivalence relation {self.relation} not in signature")
        profile = signature.relation(self.relation).profile
        if profile != self.expected_profile():
            raise SignatureMismatchError(
                f"{self.relation} has profile {profile}, expected {self.expected_profile()}"
            )

    def is_redundant(self, t: Sequence[int]) -> bool:
        return len(set(t)) < len(t)

    def parameters(self, M: FinStructure):
        if self.parameter_sort is None:
            return [None]
        return list(range(M.size_of(self.parameter_sort)))

    def tuple_domain(self, M: FinStructure):
        return list(product(range(M.size_of(self.object_sort)), repeat=self.k))

    def elements_of(self, M: FinStructure, a, *tuples) -> Tuple[Element, ...]:
        signature = M.signature
        result = []
        if a is not None:
            result.append((signature.sort_index(self.parameter_sort), a))
        obj = signature.sort_index(self.object_sort)
        for t in tuples:
            for i in t:
                if (obj, i) not in result:
                    result.append((obj, i))
        return tuple(result)

    def adjacency(self, M: FinStructure, a) -> Dict[tuple, set]:
        k, offset = self.k, self.offset
        adjacency: Dict[tuple, set] = {}
        for fact in M.fact_set(self.relation):
            if offset and fact[0] != a:
                continue
            t, u = fact[offset:offset + k], fact[offset + k:]
            adjacency.setdefault(t, set()).add(u)
        return adjacency

    def classes(self, M: FinStructure, a) -> Tuple[Optional[Violation], Dict[tuple, FrozenSet[tuple]]]:
        """Check the equivalence axioms for one parameter; return the class of each tuple."""
        adjacency = self.adjacency(M, a)
        interned: Dict[FrozenSet[tuple], FrozenSet[tuple]] = {}
        class_of: Dict[tuple, FrozenSet[tuple]] = {}
        for t in self.tuple_domain(M):
            related = adjacency.get(t, set())
            if t not in related:
                return Violation(self.describe(), self.elements_of(M, a, t), "not reflexive"), {}
            frozen = frozenset(related)
            class_of[t] = interned.setdefault(frozen, frozen)
        for t, cls in class_of.items():
            for u in cls:
                if class_of[u] is not cls:
                    if t not in class_of[u]:
                        detail, witness = "not symmetric", (t, u)
                    else:
                        w = next(iter(cls.symmetric_difference(class_of[u])))
                        detail, witness = "not transitive", (t, u, w)
                    return Violation(self.describe(), self.elements_of(M, a, *witness), detail), {}
        return None, class_of

    def check(self, M):
        for a in self.parameters(M):
            violation, class_of = self.classes(M, a)
            if violation is not None:
                return violation
            redundant = [t for t in class_of if self.is_redundant(t)]
            if self.redundant_class and redundant:
                expected = frozenset(redundant)
                for t in redundant:
                    if class_of[t] != expected:
                        other = next(iter(class_of[t].symmetric_difference(expected)))
                        return Violation(
                            self.describe(),
                            self.elements_of(M, a, t, other),
                            "redundant tuples must form exactly one class",
                        )
            if self.max_classes is not None:
                distinct = {}
                for t, cls in class_of.items():
                    if self.redundant_class and self.is_redundant(t):
                        continue
                    distinct.setdefault(id(cls), t)
                if len(distinct) > self.max_classes:
                    representatives = list(distinct.values())[: self.max_classes + 1]
                    return Violation(
                        self.describe(),
                        self.elements_of(M, a, *representatives),
                        f"more than {self.max_classes} classes",
                    )
        return None

    def width(self):
        widest = 3 * self.k
        if self.max_classes is not None:
            widest = max(widest, (self.max_classes + 1) * self.k)
        return widest + self.offset

    def split(self, fact: Fact):
        offset, k = self.offset, self.k
        head = fact[:offset]
        return head, fact[offset:offset + k], fact[offset + k:]

    def derivation(self, signature, r, fact):
        if signature.relations[r].name != self.relation:
            return None
        head, t, u = self.split(fact)
        if t == u:
            return 0, lambda lookup: True
        if self.redundant_class:
            t_red, u_red = self.is_redundant(t), self.is_redundant(u)
            if t_red and u_red:
                return 0, lambda lookup: True
            if t_red != u_red:
                return 0, lambda lookup: False
        if t > u:
            mirrored = head + u + t
            return 2, lambda lookup: lookup(r, mirrored)
        return None

    def to_dict(self):
        data = {
            "kind": self.kind,
            "relation": self.relation,
            "k": self.k,
            "object_sort": self.object_sort,
            "redundant_class": self.redundant_class,
        }
        if self.parameter_sort is not None:
            data["parameter_sort"] = self.parameter_sort
        if self.max_classes is not None:
            data["max_classes"] = self.max_classes
        return data


@dataclass(frozen=True)
class Labeling(Constraint):
    """Exactly one label holds on each tuple, and equivalent tuples share labels.

    Label relations have profile ``(parameter_sort,)? + (object_sort,) * k``
    of the tied equivalence. A reserved label, if given, holds exactly on
    the redundant tuples.
    """

    equivalence: Equivalence
    labels: Tuple[str, ...]
    reserved: Optional[str] = None

    kind = "labeling"

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        if not self.labels:
            raise ValueError("A labeling needs at least one label")
        if self.reserved is not None and self.reserved not in self.labels:
            raise ValueError(f"Reserved label {self.reserved} is not among {self.labels}")

    def describe(self):
        return f"labeling({self.equivalence.relation} by {', '.join(self.labels)})"

    def relations(self):
        return frozenset(self.labels) | {self.equivalence.relation}

    def validate(self, signature):
        self.equivalence.validate(signature)
        expected = self.equivalence.expected_profile()[: self.equivalence.offset + self.equivalence.k]
        for name in self.labels:
            if not signature.has_relation(name):
                raise SignatureMismatchError(f"Label relation {name} not in signature")
            if signature.relation(name).profile != expected:
                raise SignatureMismatchError(f"Label {name} must have profile {expected}")

    def _label_check(self, M, a, t) -> Optional[Violation]:
        eq = self.equivalence
        head = (a,) if a is not None else ()
        held = [name for name in self.labels if M.holds(name, head + t)]
        if len(held) != 1:
            return Violation(self.describe(), eq.elements_of(M, a, t), f"{len(held)} labels hold")
        if self.reserved is not None and (held[0] == self.reserved) != eq.is_redundant(t):
            return Violation(self.describe(), eq.elements_of(M, a, t), "reserved label must mark exactly the redundant tuples")
        return None

    def check(self, M):
        eq = self.equivalence
        for a in eq.parameters(M):
            head = (a,) if a is not None else ()
            label_of = {}
            groups: Dict[str, set] = {}
            for t in eq.tuple_domain(M):
                violation = self._label_check(M, a, t)
                if violation is not None:
                    return violation
                name = next(n for n in self.labels if M.holds(n, head + t))
                label_of[t] = name
                groups.setdefault(name, set()).add(t)
            adjacency = eq.adjacency(M, a)
            for t, name in label_of.items():
                related = adjacency.get(t, set())
                if related != groups[name]:
                    u = next(iter(related.symmetric_difference(groups[name])))
                    return Violation(
                        self.describe(),
                        eq.elements_of(M, a, t, u),
                        f"{eq.relation} disagrees with the labels",
                    )
        return None

    def width(self):
        return 2 * self.equivalence.k + self.equivalence.offset

    def check_block(self, B):
        eq = self.equivalence
        everything = set(B.elements())
        for a in eq.parameters(B):
            for t in eq.tuple_domain(B):
                if set(eq.elements_of(B, a, t)) != everything:
                    continue
                if self._label_check(B, a, t) is not None:
                    return False
        return True

    def block_relations(self):
        return frozenset(self.labels)

    def choice_groups(self, skeleton, free):
        eq = self.equivalence
        signature = skeleton.signature
        positions = [signature.relation_index(n) for n in self.labels]
        everything = set(skeleton.elements())
        groups = []
        for a in eq.parameters(skeleton):
            head = (a,) if a is not None else ()
            for t in eq.tuple_domain(skeleton):
                if set(eq.elements_of(skeleton, a, t)) != everything:
                    continue
                group = [(p, head + t) for p in positions if (p, head + t) in free]
                if group:
                    groups.append(group)
        return groups

    def derivation(self, signature, r, fact):
        eq = self.equivalence
        name = signature.relations[r].name
        if name == eq.relation:
            head, t, u = eq.split(fact)
            label_positions = [signature.relation_index(n) for n in self.labels]
            left, right = head + t, head + u
            return 1, lambda lookup: any(lookup(p, left) and lookup(p, right) for p in label_positions)
        if name in self.labels and self.reserved is not None:
            t = fact[eq.offset:]
            if eq.is_redundant(t):
                value = name == self.reserved
                return 0, lambda lookup: value
            if name == self.reserved:
                return 0, lambda lookup: False
        return None

    def to_dict(self):
        data = {"kind": self.kind, "relation": self.equivalence.relation, "labels": list(self.labels)}
        if self.reserved is not None:
            data["reserved"] = self.reserved
        return data


def constraint_from_dict(data: dict, signature: Signature, equivalences: Dict[str, Equivalence]) -> Constraint:
    """Decode one entry of a spec file's ``constraints`` list."""
    try:
        kind = data["kind"]
        if kind == ForbiddenInduced.kind:
            return ForbiddenInduced(literal.loads(data["structure"], signature), data.get("label", ""))
        if kind == Parametric.kind:
            return Parametric(parse_sentence(data["sentence"], signature), data.get("label", ""))
        if kind == Local.kind:
            return Local(parse_sentence(data["sentence"], signature), data.get("label", ""))
        if kind == Equivalence.kind:
            return Equivalence(
                relation=data["relation"],
                k=int(data.get("k", 1)),
                object_sort=data["object_sort"],
                parameter_sort=data.get("parameter_sort"),
                redundant_class=bool(data.get("redundant_class", False)),
                max_classes=data.get("max_classes"),
            )
        if kind == Labeling.kind:
            relation = data["relation"]
            if relation not in equivalences:
                raise ValueError(f"Labeling refers to {relation}, which has no equivalence constraint")
            return Labeling(equivalences[relation], tuple(data["labels"]), data.get("reserved"))
    except KeyError as e:
        raise ValueError(f"Constraint entry missing field {e}")
    raise ValueError(f"Unknown constraint kind {data.get('kind')!r}")
