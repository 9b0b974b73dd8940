"""
Enumeration of K(n) and completion of coherent families.

A *block* is the set of relation instances whose support is the whole
domain of a canonical structure of shape ``counts``. A structure is fixed
by its blocks, so the members of K on a domain are built subset by subset:
the type of a subset S is the union of its facets' types plus a choice of
block facts for S, kept when the result is a member.

Block facts split three ways. Forced facts follow from a constraint alone,
derived facts are computed from facts of a lower stage, and the remaining
free facts are enumerated (at most ``2^guard`` assignments), pruned by the
constraints' block checks.
"""

import logging
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from math import prod
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from numpy.random import Generator
from scipy.special import perm

from fraisse.classes.constraints import Equivalence, Labeling
from fraisse.classes.spec import ClassSpec
from fraisse.constants import DEFAULT_BELL_TABLE_MAX, DEFAULT_ENUMERATION_GUARD
from fraisse.errors import GuardExceededError, IncoherentProblemError
from fraisse.problems import AmalgProblem, check_coherence
from fraisse.sampling.partitions import default_sampler, iter_set_partitions
from fraisse.sampling.rng import uniform_below
from fraisse.structures.structure import Fact, FinStructure, fact_support, instances, normalize_sizes

logger = logging.getLogger(__name__)

Instance = Tuple[int, Fact]


@dataclass(frozen=True)
class BlockPlan:
    """How the block of one shape is decided."""

    counts: Tuple[int, ...]
    forced: FrozenSet[Instance]
    derived: Tuple[Tuple[int, int, Fact, Callable], ...]
    options: Tuple[FrozenSet[Instance], ...]
    free: int


@lru_cache(maxsize=None)
def _facet_maps(counts: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], ...], ...]:
    """``maps[i][s][j]``: index in the whole domain of element j of sort s in facet i."""
    maps = []
    for sort, size in enumerate(counts):
        for removed in range(size):
            per_sort = []
            for s, n in enumerate(counts):
                if s == sort:
                    per_sort.append(tuple(j if j < removed else j + 1 for j in range(n - 1)))
                else:
                    per_sort.append(tuple(range(n)))
            maps.append(tuple(per_sort))
    return tuple(maps)


def facet_shape(counts: Tuple[int, ...], i: int) -> Tuple[int, ...]:
    position = 0
    for sort, size in enumerate(counts):
        if i < position + size:
            return counts[:sort] + (size - 1,) + counts[sort + 1:]
        position += size
    raise ValueError(f"Facet {i} out of range for shape {counts}")


def positions_by_sort(sizes: Sequence[int]) -> List[int]:
    return [sort for sort, n in enumerate(sizes) for _ in range(n)]


class LevelTable:
    """Per-class cache of block plans, completion sets and levels.

    Safe to share between threads: a level requested concurrently is
    computed once and the other callers wait for it.
    """

    def __init__(self, spec: ClassSpec, guard: int = DEFAULT_ENUMERATION_GUARD):
        self.spec = spec
        self.guard = guard
        self.signature = spec.signature
        self._profiles = [
            tuple(self.signature.sort_index(s) for s in relation.profile) for relation in self.signature.relations
        ]
        self._plans: Dict[Tuple[int, ...], BlockPlan] = {}
        self._completions: Dict[tuple, Tuple[FinStructure, ...]] = {}
        self._levels: Dict[Tuple[int, ...], Tuple[FinStructure, ...]] = {}
        self._inflight: Dict[Tuple[int, ...], threading.Event] = {}
        self._lock = threading.Lock()
        # basic disjoint k-amalgamation verdicts, filled in by the amalgamation checks
        self.certificates: Dict[int, bool] = {}

    def __repr__(self):
        return f"LevelTable({self.spec.name}, levels={sorted(self._levels)})"

    def structure(self, counts: Tuple[int, ...], true: Set[Instance]) -> FinStructure:
        facts = [set() for _ in self.signature.relations]
        for r, fact in true:
            facts[r].add(fact)
        return FinStructure.trusted(self.signature, counts, tuple(frozenset(f) for f in facts))

    # -- blocks ---------------------------------------------------------

    def plan(self, counts: Tuple[int, ...]) -> BlockPlan:
        plan = self._plans.get(counts)
        if plan is None:
            plan = self._build_plan(counts)
            with self._lock:
                plan = self._plans.setdefault(counts, plan)
        return plan

    def _build_plan(self, counts: Tuple[int, ...]) -> BlockPlan:
        signature = self.signature
        constraints = self.spec.constraints
        skeleton = FinStructure.empty(signature, counts)
        everything = frozenset(skeleton.elements())
        forced: Set[Instance] = set()
        derived = []
        free: List[Instance] = []
        for r, fact in instances(signature, counts):
            if fact_support(signature, r, fact) != everything:
                continue
            best = None
            for constraint in constraints:
                derivation = constraint.derivation(signature, r, fact)
                if derivation is not None and (best is None or derivation[0] < best[0]):
                    best = derivation
            if best is None:
                free.append((r, fact))
            elif best[0] == 0:
                if best[1](None):
                    forced.add((r, fact))
            else:
                derived.append((best[0], r, fact, best[1]))
        derived.sort(key=lambda d: d[0])

        late = {signature.relations[r].name for _, r, _, _ in derived}
        checks = [c for c in constraints if not (c.block_relations() & late)]

        free_set = set(free)
        grouped: Set[Instance] = set()
        groups: List[List[Instance]] = []
        for constraint in constraints:
            for group in constraint.choice_groups(skeleton, free_set):
                if grouped.isdisjoint(group):
                    groups.append(group)
                    grouped.update(group)
        loose = [instance for instance in free if instance not in grouped]

        total = prod(len(g) for g in groups) << len(loose)
        if total > 1 << self.guard:
            raise GuardExceededError(f"free block choices for shape {counts}", f"2^{total.bit_length() - 1}", f"2^{self.guard}")

        options = []
        for choice in product(*groups):
            for mask in range(1 << len(loose)):
                chosen = set(choice)
                chosen.update(loose[i] for i in range(len(loose)) if mask >> i & 1)
                if checks:
                    block = self.structure(counts, forced | chosen)
                    if not all(c.check_block(block) for c in checks):
                        continue
                options.append(frozenset(chosen))
        logger.debug(
            f"{self.spec.name}: block {counts} has {len(free)} free, {len(forced)} forced, "
            f"{len(derived)} derived instances, {len(options)} options"
        )
        return BlockPlan(counts, frozenset(forced), tuple(derived), tuple(options), len(free))

    def _lift(self, T: FinStructure, maps) -> Iterator[Instance]:
        for r, fact_set in enumerate(T.facts):
            profile = self._profiles[r]
            for fact in fact_set:
                yield r, tuple(maps[s][i] for s, i in zip(profile, fact))

    # -- completions ----------------------------------------------------

    def completions_of_family(self, counts: Sequence[int], facets: Sequence[FinStructure]) -> Tuple[FinStructure, ...]:
        """Members of K on shape ``counts`` whose facet i is ``facets[i]``.

        Facet i is the domain minus its i-th element in flat order. The
        facets are assumed pairwise coherent.
        """
        counts = tuple(counts)
        facets = tuple(facets)
        key = (counts, facets)
        cached = self._completions.get(key)
        if cached is not None:
            return cached
        k = sum(counts)
        if len(facets) != k:
            raise ValueError(f"Shape {counts} has {k} facets, got {len(facets)}")
        for i, T in enumerate(facets):
            if T.sizes != facet_shape(counts, i):
                raise ValueError(f"Facet {i} has shape {T.sizes}, expected {facet_shape(counts, i)}")

        plan = self.plan(counts)
        base: Set[Instance] = set(plan.forced)
        for T, maps in zip(facets, _facet_maps(counts)):
            base.update(self._lift(T, maps))

        results = []
        true: Set[Instance] = set()

        def lookup(r, fact):
            return (r, fact) in true

        for option in plan.options:
            true = base | option
            for _, r, fact, rule in plan.derived:
                if rule(lookup):
                    true.add((r, fact))
            candidate = self.structure(counts, true)
            if self.spec.is_member(candidate)[0]:
                results.append(candidate)
        results.sort(key=FinStructure.encoding)
        results = tuple(results)
        with self._lock:
            results = self._completions.setdefault(key, results)
        return results

    # -- levels ---------------------------------------------------------

    def level(self, sizes) -> Tuple[FinStructure, ...]:
        """K(n): every member on the canonical domain of shape ``sizes``."""
        sizes = normalize_sizes(self.signature, sizes)
        while True:
            with self._lock:
                if sizes in self._levels:
                    return self._levels[sizes]
                event = self._inflight.get(sizes)
                owner = event is None
                if owner:
                    event = self._inflight[sizes] = threading.Event()
            if owner:
                break
            event.wait()
        try:
            if self.spec.is_partition_class():
                members = tuple(sorted(self._enumerate_partitions(sizes), key=FinStructure.encoding))
            else:
                members = self._enumerate_by_subsets(sizes)
            logger.info(f"{self.spec.name}: |K({list(sizes)})| = {len(members)}")
            with self._lock:
                self._levels[sizes] = members
            return members
        finally:
            with self._lock:
                del self._inflight[sizes]
            event.set()

    def _enumerate_by_subsets(self, sizes: Tuple[int, ...]) -> Tuple[FinStructure, ...]:
        k = sum(sizes)
        sort_of = positions_by_sort(sizes)
        n_sorts = len(sizes)
        subsets = [S for size in range(1, k + 1) for S in combinations(range(k), size)]
        shapes = []
        for S in subsets:
            counts = [0] * n_sorts
            for p in S:
                counts[sort_of[p]] += 1
            shapes.append(tuple(counts))
        types: Dict[tuple, FinStructure] = {(): FinStructure.empty(self.signature, (0,) * n_sorts)}
        results: List[FinStructure] = []
        full = tuple(range(k))

        def extend(index):
            if index == len(subsets):
                results.append(types[full])
                return
            S = subsets[index]
            facets = tuple(types[S[:j] + S[j + 1:]] for j in range(len(S)))
            for T in self.completions_of_family(shapes[index], facets):
                types[S] = T
                extend(index + 1)
            types.pop(S, None)

        if k == 0:
            empty = types[()]
            return (empty,) if self.spec.is_member(empty)[0] else ()
        extend(0)
        results.sort(key=FinStructure.encoding)
        return tuple(results)

    def _enumerate_partitions(self, sizes: Tuple[int, ...]) -> Iterator[FinStructure]:
        components = partition_components(self.spec, sizes)
        total = prod(c.count() for c in components)
        if total > 1 << self.guard:
            raise GuardExceededError(f"members of {self.spec.name} on {list(sizes)}", total, 1 << self.guard)
        choices = [[c.facts(assignment) for assignment in c.assignments()] for c in components]
        for combination in product(*choices):
            true: Set[Instance] = set()
            for facts in combination:
                true |= facts
            yield self.structure(sizes, true)


_tables: Dict[tuple, LevelTable] = {}
_tables_lock = threading.Lock()


def level_table(spec: ClassSpec, guard: Optional[int] = None) -> LevelTable:
    """The shared LevelTable for a class (one per class and guard)."""
    guard = DEFAULT_ENUMERATION_GUARD if guard is None else guard
    key = (spec.fingerprint(), guard)
    with _tables_lock:
        table = _tables.get(key)
        if table is None:
            table = _tables[key] = LevelTable(spec, guard)
        return table


def clear_level_tables():
    with _tables_lock:
        _tables.clear()


def enumerate_level(spec: ClassSpec, sizes, guard: Optional[int] = None) -> List[FinStructure]:
    """K(n) in canonical order (by encoding)."""
    return list(level_table(spec, guard).level(sizes))


def completions_of_family(spec: ClassSpec, counts, facets, guard: Optional[int] = None) -> Tuple[FinStructure, ...]:
    return level_table(spec, guard).completions_of_family(tuple(counts), tuple(facets))


def completions(spec: ClassSpec, P: AmalgProblem, guard: Optional[int] = None) -> List[FinStructure]:
    """Members of K on P's ground set whose restrictions agree with P."""
    if P.spec != spec:
        raise ValueError(f"Problem is over {P.spec.name}, not {spec.name}")
    coherent, violation = check_coherence(P)
    if not coherent:
        raise IncoherentProblemError(violation)
    table = level_table(spec, guard)
    ground = P.ground
    counts = P.counts(ground)
    if ground in P.family:
        T = P.family[ground]
        return [T] if spec.is_member(T)[0] else []
    if all(F in P.family for F in P.facets(ground)):
        return list(table.completions_of_family(counts, P.facet_types(ground)))
    constraints = [(S, T) for S, T in P.family.items() if S]
    return [
        M
        for M in table.level(counts)
        if all(P.restrict_type(M, ground, S) == T for S, T in constraints)
    ]


# -- partition classes ------------------------------------------------------


@dataclass(frozen=True)
class PartitionComponent:
    """One equivalence relation at one parameter.

    ``units`` are groups of tuples that always share a class (each
    non-redundant tuple is its own unit). Redundant tuples set aside by
    ``redundant_class`` are in ``fixed``; with an unreserved labeling they
    are the last unit instead and take a label no other unit uses.
    """

    signature: object
    equivalence: Equivalence
    labeling: Optional[Labeling]
    head: Tuple[int, ...]
    units: Tuple[Tuple[tuple, ...], ...]
    fixed: Tuple[tuple, ...]
    exclusive_last: bool = False
    sampler: object = field(default=None, compare=False, repr=False)

    @property
    def label_names(self) -> List[str]:
        if self.labeling is None:
            return []
        return [n for n in self.labeling.labels if n != self.labeling.reserved]

    @property
    def free_units(self) -> int:
        return len(self.units) - (1 if self.exclusive_last else 0)

    def assignments(self) -> Iterator[Tuple[int, ...]]:
        """Class (unlabeled) or label index (labeled) of each unit."""
        cap = self.equivalence.max_classes
        if self.labeling is None:
            yield from iter_set_partitions(len(self.units), cap)
            return
        for assignment in product(range(len(self.label_names)), repeat=len(self.units)):
            free = assignment[: self.free_units]
            if self.exclusive_last and assignment[-1] in free:
                continue
            if cap is not None and len(set(free)) > cap:
                continue
            yield assignment

    def count(self) -> int:
        cap = self.equivalence.max_classes
        n = self.free_units
        if self.labeling is None:
            return self.sampler.count(n, cap)
        labels = len(self.label_names)
        if self.exclusive_last:
            return labels * self._labelings(n, labels - 1, cap)
        return self._labelings(n, labels, cap)

    def _labelings(self, n: int, labels: int, cap: Optional[int]) -> int:
        if cap is None or cap >= min(n, labels):
            return labels ** n
        return sum(perm(labels, j, exact=True) * self.sampler.stirling2(n, j) for j in range(cap + 1))

    def sample(self, rng: Generator) -> Tuple[int, ...]:
        """A uniform assignment."""
        cap = self.equivalence.max_classes
        n = self.free_units
        if self.labeling is None:
            if cap is None:
                return self.sampler.sample(n, rng)
            return self.sampler.sample_bounded(n, cap, rng) if n else ()
        labels = list(range(len(self.label_names)))
        last = ()
        if self.exclusive_last:
            chosen = labels[uniform_below(len(labels), rng)]
            labels.remove(chosen)
            last = (chosen,)
        if n == 0:
            return last
        if not labels:
            raise ValueError(f"No label left for {self.equivalence.describe()}")
        total = self._labelings(n, len(labels), cap)
        target = uniform_below(total, rng)
        if cap is None or cap >= min(n, len(labels)):
            digits = []
            for _ in range(n):
                target, digit = divmod(target, len(labels))
                digits.append(labels[digit])
            return tuple(digits) + last
        blocks = 0
        for j in range(cap + 1):
            weight = perm(len(labels), j, exact=True) * self.sampler.stirling2(n, j)
            if target < weight:
                blocks = j
                break
            target -= weight
        rgs = self.sampler.sample_exact_blocks(n, blocks, rng)
        order = [labels[int(i)] for i in rng.permutation(len(labels))[:blocks]]
        return tuple(order[b] for b in rgs) + last

    def facts(self, assignment: Sequence[int]) -> FrozenSet[Instance]:
        signature = self.signature
        head = self.head
        relation = signature.relation_index(self.equivalence.relation)
        true: Set[Instance] = set()
        for t in self.fixed:
            for u in self.fixed:
                true.add((relation, head + t + u))
        if self.labeling is not None and self.labeling.reserved is not None:
            reserved = signature.relation_index(self.labeling.reserved)
            true.update((reserved, head + t) for t in self.fixed)
        names = [signature.relation_index(n) for n in self.label_names]
        members: Dict[int, List[tuple]] = {}
        for unit, value in zip(self.units, assignment):
            members.setdefault(value, []).extend(unit)
            if self.labeling is not None:
                true.update((names[value], head + t) for t in unit)
        for group in members.values():
            for t in group:
                for u in group:
                    true.add((relation, head + t + u))
        return frozenset(true)


def partition_components(spec: ClassSpec, sizes, bound: int = DEFAULT_BELL_TABLE_MAX) -> List[PartitionComponent]:
    """The independent components of a partition class on a domain."""
    if not spec.is_partition_class():
        raise ValueError(f"{spec.name} is not a partition class")
    signature = spec.signature
    sizes = normalize_sizes(signature, sizes)
    skeleton = FinStructure.empty(signature, sizes)
    sampler = default_sampler(bound)
    components = []
    for eq in spec.equivalences():
        labeling = spec.labeling_for(eq.relation)
        tuples = eq.tuple_domain(skeleton)
        if eq.redundant_class:
            fixed = tuple(t for t in tuples if eq.is_redundant(t))
            units = [(t,) for t in tuples if not eq.is_redundant(t)]
        else:
            fixed, units = (), [(t,) for t in tuples]
        exclusive_last = False
        if fixed and labeling is not None and labeling.reserved is None:
            units.append(fixed)
            fixed, exclusive_last = (), True
        if len(units) > bound:
            raise GuardExceededError("Bell table size", len(units), bound)
        for a in eq.parameters(skeleton):
            head = (a,) if a is not None else ()
            components.append(
                PartitionComponent(signature, eq, labeling, head, tuple(units), fixed, exclusive_last, sampler)
            )
    return components


def count_uniform_measure_space(spec: ClassSpec, sizes, guard: Optional[int] = None) -> int:
    """|K(n)|, by closed form for partition classes and by enumeration otherwise."""
    if spec.is_partition_class():
        return prod(c.count() for c in partition_components(spec, sizes))
    return len(level_table(spec, guard).level(sizes))
