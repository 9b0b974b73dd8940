"""
Axioms of the generic theory of a class.

Universal axioms say that every tuple of distinct elements of a given shape
realizes a member of the class; they are checked semantically and exported
as disjunctions of diagrams. One-point extension axioms say that every copy
of A extends to a copy of B.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from fraisse.classes.spec import ClassSpec
from fraisse.enumeration import level_table
from fraisse.logic.evaluate import evaluate
from fraisse.logic.parser import parse_sentence
from fraisse.logic.syntax import (
    And,
    Atom,
    Exists,
    Formula,
    Implies,
    Not,
    OpenFormula,
    Or,
    Var,
    distinct,
    forall,
)
from fraisse.structures.structure import Element, FinStructure, instances, restrict_positions, restrict_to

logger = logging.getLogger(__name__)

MODE_FULL = "full"
MODE_T_KN = "T_Kn"
AXIOM_MODES = [MODE_FULL, MODE_T_KN]


def default_variables(A: FinStructure, prefix: str = "x") -> List[Var]:
    """``x1..xn`` over A's flat order, each with its element's sort."""
    sorts = A.signature.sorts
    return [Var(f"{prefix}{position + 1}", sorts[sort]) for position, (sort, _) in enumerate(A.elements())]


def theta(A: FinStructure, variables: Optional[Sequence[Var]] = None) -> OpenFormula:
    """The quantifier-free diagram of A, including pairwise inequalities."""
    signature = A.signature
    variables = list(variables) if variables is not None else default_variables(A)
    if len(variables) != A.size:
        raise ValueError(f"theta needs {A.size} variables, got {len(variables)}")
    for var, (sort, _) in zip(variables, A.elements()):
        if var.sort != signature.sorts[sort]:
            raise ValueError(f"Variable {var.name} has sort {var.sort}, expected {signature.sorts[sort]}")
    by_element = {element: var for element, var in zip(A.elements(), variables)}
    parts: List[Formula] = list(distinct(variables).parts)
    for r, fact in instances(signature, A.sizes):
        relation = signature.relations[r]
        args = tuple(by_element[(signature.sort_index(s), i)] for s, i in zip(relation.profile, fact))
        atom = Atom(relation.name, args)
        parts.append(atom if fact in A.facts[r] else Not(atom))
    return OpenFormula(And(tuple(parts)), tuple(variables))


def is_one_point_extension(A: FinStructure, B: FinStructure) -> Optional[int]:
    """Sort of the new element when A is B without the last element of that sort."""
    if A.signature != B.signature:
        return None
    difference = [b - a for a, b in zip(A.sizes, B.sizes)]
    if sorted(difference) != [0] * (len(difference) - 1) + [1]:
        return None
    sort = difference.index(1)
    last = B.offsets[sort] + B.sizes[sort] - 1
    if restrict_positions(B, [p for p in range(B.size) if p != last]) != A:
        return None
    return sort


def extension_axiom(A: FinStructure, B: FinStructure) -> Formula:
    """``forall x (theta_A(x) -> exists y theta_B(x, y))``."""
    sort = is_one_point_extension(A, B)
    if sort is None:
        raise ValueError("B is not a one-point extension of A")
    xs = default_variables(A)
    y = Var("y", B.signature.sorts[sort])
    new_position = B.offsets[sort] + B.sizes[sort] - 1
    ys = xs[:new_position] + [y] + xs[new_position:]
    body = Implies(theta(A, xs).formula, Exists(y, theta(B, ys).formula))
    return forall(xs, body)


def realized_types(M: FinStructure, counts: Sequence[int]) -> Iterator[Tuple[Tuple[Element, ...], FinStructure]]:
    """Each set of distinct elements of shape ``counts`` with its type."""
    per_sort = [combinations(range(size), n) for size, n in zip(M.sizes, counts)]
    for choice in product(*per_sort):
        elements = tuple((sort, i) for sort, indices in enumerate(choice) for i in indices)
        yield elements, restrict_to(M, elements)


@dataclass(frozen=True, eq=False)
class UniversalAxiom:
    """Every set of distinct elements of shape ``counts`` realizes one of ``members``."""

    counts: Tuple[int, ...]
    members: Tuple[FinStructure, ...]
    _index: frozenset = field(default=frozenset(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", frozenset(self.members))

    @property
    def name(self) -> str:
        return f"universal{list(self.counts)}"

    def counterexample(self, M: FinStructure) -> Optional[Tuple[Element, ...]]:
        for elements, realized in realized_types(M, self.counts):
            if realized not in self._index:
                return elements
        return None

    def check(self, M: FinStructure) -> bool:
        return self.counterexample(M) is None

    def to_sentence(self, signature) -> Formula:
        """``forall x (distinct(x) -> OR of theta_A(x))``."""
        skeleton = FinStructure.empty(signature, self.counts)
        xs = default_variables(skeleton)
        disjuncts = tuple(theta(A, xs).formula for A in self.members)
        return forall(xs, Implies(distinct(xs), Or(disjuncts)))


@dataclass(frozen=True, eq=False)
class ExtensionAxiom:
    A: FinStructure
    B: FinStructure
    sentence: Formula
    index: int = 0

    @property
    def name(self) -> str:
        return f"ext{self.index}:{list(self.A.sizes)}->{list(self.B.sizes)}"

    def check(self, M: FinStructure) -> bool:
        return evaluate(M, self.sentence)


@dataclass
class AxiomSet:
    spec_name: str
    bound: int
    mode: str = MODE_FULL
    universal: List[UniversalAxiom] = field(default_factory=list)
    extension: List[ExtensionAxiom] = field(default_factory=list)
    note: str = ""

    def __len__(self):
        return len(self.universal) + len(self.extension)

    def axioms(self) -> list:
        return list(self.universal) + list(self.extension)

    def check(self, M: FinStructure):
        """The first axiom M fails, or None."""
        for axiom in self.axioms():
            if not axiom.check(M):
                return axiom
        return None

    def sentences(self, signature=None) -> List[Tuple[str, Formula]]:
        """Named sentences; universal axioms are exported as disjunctions over ``signature``."""
        result = []
        if self.universal:
            if signature is None:
                raise ValueError("Exporting universal axioms needs the class signature")
            result.extend((axiom.name, axiom.to_sentence(signature)) for axiom in self.universal)
        result.extend((axiom.name, axiom.sentence) for axiom in self.extension)
        return result


def shapes_up_to(n_sorts: int, bound: int) -> List[Tuple[int, ...]]:
    return sorted(
        (c for c in product(range(bound + 1), repeat=n_sorts) if 1 <= sum(c) <= bound),
        key=lambda c: (sum(c), c),
    )


def one_point_extensions(spec: ClassSpec, bound: int, guard: Optional[int] = None) -> Iterator[Tuple[FinStructure, FinStructure]]:
    """Every (A, B) with B in K, |B| <= bound, and A = B minus the last element of some sort."""
    table = level_table(spec, guard)
    for counts in shapes_up_to(len(spec.signature.sorts), bound):
        for B in table.level(counts):
            for sort, size in enumerate(counts):
                if size == 0:
                    continue
                last = B.offsets[sort] + size - 1
                yield restrict_positions(B, [p for p in range(B.size) if p != last]), B


def generate_axioms(
    spec: ClassSpec,
    bound: int,
    mode: str = MODE_FULL,
    n: Optional[int] = None,
    guard: Optional[int] = None,
) -> AxiomSet:
    """Universal axioms for shapes of size up to ``bound`` (``n`` in T_Kn mode) and all extension axioms within ``bound``."""
    if mode not in AXIOM_MODES:
        raise ValueError(f"Unknown axiom mode {mode!r}; expected one of {AXIOM_MODES}")
    if mode == MODE_T_KN and n is None:
        raise ValueError("T_Kn mode needs n")
    if bound < 0:
        raise ValueError("bound must be non-negative")
    table = level_table(spec, guard)
    axioms = AxiomSet(spec.name, bound, mode)
    if not spec.certified_amalgamation:
        axioms.note = f"{spec.name} is not certified to have disjoint amalgamation; the axioms carry no completeness claim"
    universal_bound = bound if mode == MODE_FULL else min(bound, n)
    for counts in shapes_up_to(len(spec.signature.sorts), universal_bound):
        axioms.universal.append(UniversalAxiom(counts, table.level(counts)))
    for A, B in one_point_extensions(spec, bound, guard):
        axioms.extension.append(ExtensionAxiom(A, B, extension_axiom(A, B), len(axioms.extension)))
    logger.info(
        f"{spec.name}: {len(axioms.universal)} universal and {len(axioms.extension)} extension axioms (bound {bound}, {mode})"
    )
    return axioms


_NAMED: Dict[str, str] = {
    # any two classes of distinct parametrized equivalence relations intersect
    "feq-intersect": (
        "(forall ((x P) (x2 P) (y O) (y2 O))"
        " (exists (z O) (implies (not (= x x2)) (and (E x y z) (E x2 y2 z)))))"
    ),
    # every pair is E2-equivalent to a pair extending an E1-class representative
    "cpz-surjective": "(forall ((x V) (y V) (y2 V)) (exists (z V) (and (E1 x z) (E2 y y2 x z))))",
}


def named_sentence(key: str) -> Formula:
    if key not in _NAMED:
        raise ValueError(f"Unknown named sentence {key!r}; expected one of {sorted(_NAMED)}")
    return parse_sentence(_NAMED[key])


def named_sentence_keys() -> List[str]:
    return sorted(_NAMED)
