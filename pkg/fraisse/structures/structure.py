"""
Finite multi-sorted relational structures.

Elements are dense 0-based indices per sort. An element is addressed as a
pair ``(sort_position, index)``; the *flat order* of a structure lists the
elements sort-major (all elements of the first sort, then the second, ...),
so restricting to a set of flat positions is order-preserving. A structure
on a canonical domain doubles as the non-redundant quantifier-free type of
a variable tuple of that shape.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from fraisse.errors import SignatureMismatchError
from fraisse.structures.signature import Signature

logger = logging.getLogger(__name__)

Element = Tuple[int, int]
Fact = Tuple[int, ...]
SizesLike = Union[int, Sequence[int], Mapping[str, int]]


def normalize_sizes(signature: Signature, sizes: SizesLike) -> Tuple[int, ...]:
    """Accept an int (single-sorted), a per-sort sequence or a ``{sort: n}`` mapping."""
    if isinstance(sizes, Mapping):
        unknown = set(sizes) - set(signature.sorts)
        if unknown:
            raise ValueError(f"Unknown sorts in sizes: {sorted(unknown)}")
        result = tuple(int(sizes.get(s, 0)) for s in signature.sorts)
    elif isinstance(sizes, int):
        if not signature.is_single_sorted():
            raise ValueError(f"A bare size needs a single-sorted signature, got sorts {signature.sorts}")
        result = (sizes,)
    else:
        result = tuple(int(n) for n in sizes)
        if len(result) != len(signature.sorts):
            raise ValueError(f"Expected {len(signature.sorts)} sizes, got {len(result)}")
    if any(n < 0 for n in result):
        raise ValueError(f"Sizes must be non-negative, got {result}")
    return result


class FinStructure:
    """Immutable finite structure.

    ``facts[r]`` is the frozenset of index tuples on which the r-th relation
    of the signature holds. Equality is extensional.
    """

    __slots__ = ("signature", "sizes", "facts", "_hash", "_encoding")

    def __init__(self, signature: Signature, sizes: SizesLike, facts: Sequence[Iterable[Fact]]):
        sizes = normalize_sizes(signature, sizes)
        if len(facts) != len(signature.relations):
            raise ValueError(f"Expected {len(signature.relations)} fact sets, got {len(facts)}")
        checked = []
        for relation, fact_set in zip(signature.relations, facts):
            bounds = [sizes[signature.sort_index(s)] for s in relation.profile]
            frozen = frozenset(tuple(int(i) for i in f) for f in fact_set)
            for fact in frozen:
                if len(fact) != relation.arity:
                    raise ValueError(f"Fact {fact} has wrong arity for {relation.name}/{relation.arity}")
                for index, bound in zip(fact, bounds):
                    if not 0 <= index < bound:
                        raise ValueError(f"Fact {relation.name}{fact} out of range for sizes {sizes}")
            checked.append(frozen)
        self._init(signature, sizes, tuple(checked))

    def _init(self, signature, sizes, facts):
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "facts", facts)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_encoding", None)

    @classmethod
    def trusted(cls, signature: Signature, sizes: Tuple[int, ...], facts: Tuple[FrozenSet[Fact], ...]) -> "FinStructure":
        """Construct without validation; callers guarantee well-formed input."""
        structure = object.__new__(cls)
        structure._init(signature, tuple(sizes), tuple(facts))
        return structure

    @classmethod
    def build(cls, signature: Signature, sizes: SizesLike, facts: Optional[Mapping[str, Iterable[Fact]]] = None) -> "FinStructure":
        """Build from ``{relation_name: tuples}``; absent relations are empty."""
        facts = dict(facts or {})
        unknown = set(facts) - set(signature.relation_names)
        if unknown:
            raise ValueError(f"Unknown relations: {sorted(unknown)}")
        return cls(signature, sizes, [facts.get(name, ()) for name in signature.relation_names])

    @classmethod
    def empty(cls, signature: Signature, sizes: SizesLike = 0) -> "FinStructure":
        if isinstance(sizes, int) and sizes == 0:
            sizes = (0,) * len(signature.sorts)
        sizes = normalize_sizes(signature, sizes)
        return cls.trusted(signature, sizes, tuple(frozenset() for _ in signature.relations))

    def __setattr__(self, name, value):
        raise AttributeError("FinStructure is immutable")

    def __eq__(self, other):
        if not isinstance(other, FinStructure):
            return NotImplemented
        return (
            self.sizes == other.sizes
            and self.facts == other.facts
            and self.signature == other.signature
        )

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.sizes, self.facts)))
        return self._hash

    def __lt__(self, other):
        return self.encoding() < other.encoding()

    def __repr__(self):
        counts = ", ".join(f"{r.name}:{len(f)}" for r, f in zip(self.signature.relations, self.facts))
        return f"FinStructure(sizes={self.sizes}, facts={{{counts}}})"

    # -- domain ---------------------------------------------------------

    @property
    def size(self) -> int:
        return sum(self.sizes)

    def size_of(self, sort: str) -> int:
        return self.sizes[self.signature.sort_index(sort)]

    @property
    def offsets(self) -> Tuple[int, ...]:
        result, total = [], 0
        for n in self.sizes:
            result.append(total)
            total += n
        return tuple(result)

    def elements(self) -> List[Element]:
        """All elements in flat (sort-major) order."""
        return [(s, i) for s, n in enumerate(self.sizes) for i in range(n)]

    def element_at(self, position: int) -> Element:
        for s, n in enumerate(self.sizes):
            if position < n:
                return (s, position)
            position -= n
        raise ValueError("Flat position out of range")

    def position_of(self, element: Element) -> int:
        sort, index = element
        return self.offsets[sort] + index

    # -- facts ----------------------------------------------------------

    def fact_set(self, name: str) -> FrozenSet[Fact]:
        return self.facts[self.signature.relation_index(name)]

    def holds(self, name: str, fact: Sequence[int]) -> bool:
        return tuple(fact) in self.fact_set(name)

    @property
    def num_facts(self) -> int:
        return sum(len(f) for f in self.facts)

    def encoding(self) -> tuple:
        """Canonical labeled encoding; orders structures and detects duplicates."""
        if self._encoding is None:
            object.__setattr__(
                self, "_encoding", (self.sizes, tuple(tuple(sorted(f)) for f in self.facts))
            )
        return self._encoding

    def reduct(self, signature: Signature) -> "FinStructure":
        """Forget the relations not in ``signature`` (a sub-signature)."""
        if signature.sorts != self.signature.sorts or not self.signature.extends(signature):
            raise SignatureMismatchError("Reduct signature is not a sub-signature")
        facts = tuple(self.fact_set(r.name) for r in signature.relations)
        return FinStructure.trusted(signature, self.sizes, facts)


def check_same_signature(first: Signature, second: Signature, what: str = "structure"):
    if first != second:
        raise SignatureMismatchError(f"{what} signature mismatch")


def instances(signature: Signature, sizes: Sequence[int]) -> Iterator[Tuple[int, Fact]]:
    """Every (relation position, index tuple) respecting sort profiles."""
    for r, relation in enumerate(signature.relations):
        ranges = [range(sizes[signature.sort_index(s)]) for s in relation.profile]
        for fact in product(*ranges):
            yield r, fact


def fact_support(signature: Signature, relation_position: int, fact: Fact) -> FrozenSet[Element]:
    """The set of distinct elements a relation instance mentions."""
    profile = signature.relations[relation_position].profile
    return frozenset((signature.sort_index(s), i) for s, i in zip(profile, fact))


def _normalize_tuple(M: FinStructure, t: Sequence) -> List[Element]:
    signature = M.signature
    result = []
    for entry in t:
        if isinstance(entry, (tuple, list)):
            sort, index = entry
            if isinstance(sort, str):
                sort = signature.sort_index(sort)
        else:
            if not signature.is_single_sorted():
                raise ValueError("Bare indices need a single-sorted signature; use (sort, index) pairs")
            sort, index = 0, entry
        sort, index = int(sort), int(index)
        if not 0 <= sort < len(M.sizes) or not 0 <= index < M.sizes[sort]:
            raise ValueError(f"Element {entry!r} out of range for sizes {M.sizes}")
        result.append((sort, index))
    return result


def restrict_to(M: FinStructure, elements: Sequence[Element]) -> FinStructure:
    """Type of a tuple of distinct elements; element j becomes (sort, rank within its sort)."""
    if len(set(elements)) != len(elements):
        raise ValueError(f"Tuple has repeated elements: {list(elements)}")
    signature = M.signature
    counts = [0] * len(M.sizes)
    image: Dict[Element, int] = {}
    by_sort: List[List[int]] = [[] for _ in M.sizes]
    for sort, index in elements:
        image[(sort, index)] = counts[sort]
        counts[sort] += 1
        by_sort[sort].append(index)
    facts = []
    for r, relation in enumerate(signature.relations):
        profile = [signature.sort_index(s) for s in relation.profile]
        source = M.facts[r]
        kept = set()
        candidates = 1
        for s in profile:
            candidates *= len(by_sort[s])
        if candidates <= len(source):
            for fact in product(*(by_sort[s] for s in profile)):
                if fact in source:
                    kept.add(tuple(image[(s, i)] for s, i in zip(profile, fact)))
        else:
            selected = [set(ix) for ix in by_sort]
            for fact in source:
                if all(i in selected[s] for s, i in zip(profile, fact)):
                    kept.add(tuple(image[(s, i)] for s, i in zip(profile, fact)))
        facts.append(frozenset(kept))
    return FinStructure.trusted(signature, tuple(counts), tuple(facts))


def restrict_positions(M: FinStructure, positions: Iterable[int]) -> FinStructure:
    """Induced substructure on a set of flat positions."""
    ordered = sorted(set(positions))
    if ordered and (ordered[0] < 0 or ordered[-1] >= M.size):
        raise ValueError(f"Positions {ordered} out of range for size {M.size}")
    return restrict_to(M, [M.element_at(p) for p in ordered])


def induced_substructure(M: FinStructure, sel) -> FinStructure:
    """Structure on the selected elements, renumbered order-preservingly.

    ``sel`` is a ``{sort: indices}`` mapping, a per-sort sequence of index
    collections, or (single-sorted signatures only) a flat collection of
    indices.
    """
    signature = M.signature
    if isinstance(sel, Mapping):
        per_sort = [sorted(set(sel.get(s, ()))) for s in signature.sorts]
        unknown = set(sel) - set(signature.sorts)
        if unknown:
            raise ValueError(f"Unknown sorts in selection: {sorted(unknown)}")
    else:
        sel = list(sel)
        if signature.is_single_sorted() and all(isinstance(i, int) for i in sel):
            per_sort = [sorted(set(sel))]
        else:
            if len(sel) != len(signature.sorts):
                raise ValueError("Selection must list indices for every sort")
            per_sort = [sorted(set(ix)) for ix in sel]
    elements = []
    for s, indices in enumerate(per_sort):
        for i in indices:
            if not 0 <= i < M.sizes[s]:
                raise ValueError(f"Index {i} out of range for sort {signature.sorts[s]} of size {M.sizes[s]}")
            elements.append((s, i))
    return restrict_to(M, elements)


def qf_type_of_tuple(M: FinStructure, t: Sequence) -> FinStructure:
    """The non-redundant quantifier-free type of ``t``.

    Entries are ``(sort, index)`` pairs (sort by name or position) or bare
    indices for single-sorted signatures. Repeated entries raise ValueError.
    """
    return restrict_to(M, _normalize_tuple(M, t))


def permute(M: FinStructure, permutations: Sequence[Sequence[int]]) -> FinStructure:
    """Relabel element i of sort s as permutations[s][i]."""
    if len(permutations) != len(M.sizes):
        raise ValueError("Need one permutation per sort")
    for s, perm in enumerate(permutations):
        if sorted(perm) != list(range(M.sizes[s])):
            raise ValueError(f"Not a permutation of sort {s}: {list(perm)}")
    signature = M.signature
    facts = []
    for r, relation in enumerate(signature.relations):
        profile = [signature.sort_index(s) for s in relation.profile]
        facts.append(
            frozenset(tuple(permutations[s][i] for s, i in zip(profile, fact)) for fact in M.facts[r])
        )
    return FinStructure.trusted(signature, M.sizes, tuple(facts))


@dataclass(frozen=True)
class SubsetEmbedding:
    """Injective per-sort map from a canonical source domain into ``target``."""

    source_sizes: Tuple[int, ...]
    target: FinStructure
    mapping: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.mapping) != len(self.source_sizes) or len(self.mapping) != len(self.target.sizes):
            raise ValueError("Embedding needs one index map per sort")
        for s, indices in enumerate(self.mapping):
            if len(indices) != self.source_sizes[s]:
                raise ValueError(f"Sort {s}: map has {len(indices)} entries, source has {self.source_sizes[s]}")
            if len(set(indices)) != len(indices):
                raise ValueError(f"Sort {s}: map is not injective")
            if any(not 0 <= i < self.target.sizes[s] for i in indices):
                raise ValueError(f"Sort {s}: map leaves the target domain")

    def image(self) -> List[Element]:
        return [(s, i) for s, indices in enumerate(self.mapping) for i in indices]

    def pullback(self) -> FinStructure:
        """The structure induced on the source through the map."""
        return restrict_to(self.target, self.image())

    def is_embedding_of(self, A: FinStructure) -> bool:
        return A.sizes == self.source_sizes and self.pullback() == A


@lru_cache(maxsize=512)
def _embedding_plan(A: FinStructure):
    """Group A's relation instances by their last flat position."""
    signature = A.signature
    offsets = A.offsets
    plan: List[List[Tuple[int, Tuple[int, ...], bool]]] = [[] for _ in range(A.size)]
    for r, fact in instances(signature, A.sizes):
        profile = [signature.sort_index(s) for s in signature.relations[r].profile]
        flat = tuple(offsets[s] + i for s, i in zip(profile, fact))
        plan[max(flat)].append((r, flat, fact in A.facts[r]))
    return plan


def iter_embeddings(A: FinStructure, M: FinStructure) -> Iterator[SubsetEmbedding]:
    """All embeddings of A into M as an induced substructure."""
    check_same_signature(A.signature, M.signature, "embedding")
    if any(a > m for a, m in zip(A.sizes, M.sizes)):
        return
    elements = A.elements()
    plan = _embedding_plan(A)
    images: List[int] = [0] * len(elements)
    used: List[set] = [set() for _ in M.sizes]

    def consistent(position):
        for r, flat, expected in plan[position]:
            image = tuple(images[p] for p in flat)
            if (image in M.facts[r]) != expected:
                return False
        return True

    def extend(position):
        if position == len(elements):
            mapping = []
            for s, n in enumerate(A.sizes):
                start = sum(A.sizes[:s])
                mapping.append(tuple(images[start:start + n]))
            yield SubsetEmbedding(A.sizes, M, tuple(mapping))
            return
        sort = elements[position][0]
        for candidate in range(M.sizes[sort]):
            if candidate in used[sort]:
                continue
            images[position] = candidate
            if consistent(position):
                used[sort].add(candidate)
                yield from extend(position + 1)
                used[sort].discard(candidate)

    yield from extend(0)


def full_support_facts(M: FinStructure) -> List[Tuple[int, Fact]]:
    """Facts whose support is the whole domain of M."""
    everything = frozenset(M.elements())
    signature = M.signature
    result = []
    for r, fact_set in enumerate(M.facts):
        for fact in fact_set:
            if fact_support(signature, r, fact) == everything:
                result.append((r, fact))
    return result
