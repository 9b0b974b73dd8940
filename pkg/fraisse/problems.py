"""
Amalgamation problems: coherent downward-closed families of types.

Variables are ``0..k-1``, each with a sort. The type ``p_S`` of a subset S
is a structure on S's canonical domain: the variable v of S becomes the
element ``(sort(v), rank of v among S's variables of that sort)``. Ordering
S's variables by (sort, variable) gives the flat order of ``p_S``; the
*facets* of S are S minus each variable in that order.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from fraisse.classes.spec import ClassSpec
from fraisse.structures import literal
from fraisse.structures.structure import Element, FinStructure, restrict_to

logger = logging.getLogger(__name__)

Subset = FrozenSet[int]


@dataclass(frozen=True)
class CoherenceViolation:
    """``p_sup`` restricted to ``sub`` disagrees with ``p_sub`` (or ``p_sub`` is missing)."""

    sub: Tuple[int, ...]
    sup: Tuple[int, ...]
    detail: str

    def __str__(self):
        return f"p{list(self.sup)} vs p{list(self.sub)}: {self.detail}"


@dataclass(frozen=True, eq=False)
class AmalgProblem:
    spec: ClassSpec
    sorts: Tuple[int, ...]
    family: Mapping[Subset, FinStructure]

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(int(s) for s in self.sorts))
        object.__setattr__(self, "family", {frozenset(S): T for S, T in dict(self.family).items()})
        n_sorts = len(self.spec.signature.sorts)
        if any(not 0 <= s < n_sorts for s in self.sorts):
            raise ValueError(f"Variable sorts {self.sorts} out of range")
        for S in self.family:
            if any(not 0 <= v < self.k for v in S):
                raise ValueError(f"Subset {sorted(S)} mentions variables outside 0..{self.k - 1}")

    @classmethod
    def empty(cls, spec: ClassSpec, sorts: Sequence[int]) -> "AmalgProblem":
        return cls(spec, tuple(sorts), {})

    @property
    def k(self) -> int:
        return len(self.sorts)

    @property
    def ground(self) -> Subset:
        return frozenset(range(self.k))

    def counts(self, S: Iterable[int]) -> Tuple[int, ...]:
        counts = [0] * len(self.spec.signature.sorts)
        for v in S:
            counts[self.sorts[v]] += 1
        return tuple(counts)

    def ordered(self, S: Iterable[int]) -> List[int]:
        """S's variables in the flat order of p_S."""
        return sorted(S, key=lambda v: (self.sorts[v], v))

    def element_of(self, S: Iterable[int], v: int) -> Element:
        sort = self.sorts[v]
        return (sort, sum(1 for u in S if self.sorts[u] == sort and u < v))

    def restrict_type(self, T: FinStructure, S: Iterable[int], sub: Iterable[int]) -> FinStructure:
        """The part of a type on S that concerns the variables of ``sub``."""
        S = list(S)
        return restrict_to(T, [self.element_of(S, v) for v in self.ordered(sub)])

    def facets(self, S: Iterable[int]) -> List[Subset]:
        ordered = self.ordered(S)
        whole = frozenset(ordered)
        return [whole - {v} for v in ordered]

    def facet_types(self, S: Iterable[int]) -> Tuple[FinStructure, ...]:
        return tuple(self.family[F] for F in self.facets(S))

    def with_type(self, S: Iterable[int], T: FinStructure) -> "AmalgProblem":
        family = dict(self.family)
        family[frozenset(S)] = T
        return AmalgProblem(self.spec, self.sorts, family)

    def is_basic(self) -> bool:
        """F is exactly the proper subsets of the ground set."""
        expected = {frozenset(c) for r in range(self.k) for c in combinations(range(self.k), r)}
        return set(self.family) == expected

    def missing_subsets(self) -> List[Subset]:
        """Subsets of the ground (including the ground) absent from F, by size then lexicographically."""
        return [
            frozenset(c)
            for r in range(1, self.k + 1)
            for c in combinations(range(self.k), r)
            if frozenset(c) not in self.family
        ]

    def closure(self) -> "AmalgProblem":
        """Add every subset of a member of F, restricted from a superset."""
        family = dict(self.family)
        for S in sorted(self.family, key=len, reverse=True):
            for r in range(len(S)):
                for sub in combinations(sorted(S), r):
                    sub = frozenset(sub)
                    if sub not in family:
                        family[sub] = self.restrict_type(self.family[S], S, sub)
        return AmalgProblem(self.spec, self.sorts, family)

    @classmethod
    def from_top_types(cls, spec: ClassSpec, sorts: Sequence[int], facets: Mapping[Subset, FinStructure]) -> "AmalgProblem":
        """Downward closure of a family given on some subsets (e.g. the facets)."""
        return cls(spec, tuple(sorts), dict(facets)).closure()

    def to_dict(self) -> dict:
        names = self.spec.signature.sorts
        return {
            "sorts": [names[s] for s in self.sorts],
            "family": {
                ",".join(str(v) for v in sorted(S)): literal.dumps(T)
                for S, T in sorted(self.family.items(), key=lambda item: (len(item[0]), sorted(item[0])))
            },
        }

    def __repr__(self):
        return f"AmalgProblem(spec={self.spec.name}, k={self.k}, |F|={len(self.family)})"


def _describe_difference(signature, first: FinStructure, second: FinStructure) -> str:
    if first.sizes != second.sizes:
        return f"domain sizes {first.sizes} vs {second.sizes}"
    for relation, a, b in zip(signature.relations, first.facts, second.facts):
        difference = sorted(a.symmetric_difference(b))
        if difference:
            fact = difference[0]
            side = "restriction" if fact in a else "subset type"
            args = " ".join(str(i) for i in fact)
            return f"fact {relation.name}({args}) only in the {side}"
    return "types differ"


def check_coherence(P: AmalgProblem) -> Tuple[bool, Optional[CoherenceViolation]]:
    """Verify downward closure, the empty 0-type and agreement under restriction."""
    signature = P.spec.signature
    for S in sorted(P.family, key=lambda s: (len(s), sorted(s))):
        T = P.family[S]
        if T.signature != signature or T.sizes != P.counts(S):
            return False, CoherenceViolation(tuple(sorted(S)), tuple(sorted(S)), "type has the wrong shape or signature")
        if not S:
            if T.num_facts:
                return False, CoherenceViolation((), (), "the 0-type must be empty")
            continue
        for v in sorted(S):
            sub = S - {v}
            if sub not in P.family:
                return False, CoherenceViolation(tuple(sorted(sub)), tuple(sorted(S)), "family is not downward closed")
            restricted = P.restrict_type(T, S, sub)
            if restricted != P.family[sub]:
                detail = _describe_difference(signature, restricted, P.family[sub])
                return False, CoherenceViolation(tuple(sorted(sub)), tuple(sorted(S)), detail)
    return True, None
