"""
Disjoint amalgamation: basic k-amalgamation checks, bottom-up solutions of
partial problems, reduction of problems over a finite base, and bounded
checks of Fraisse expansions.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

from numpy.random import Generator

from fraisse.classes.spec import ClassSpec
from fraisse.constants import POLICY_EXHAUSTIVE, POLICY_FIRST, POLICY_UNIFORM, SOLVE_POLICIES
from fraisse.enumeration import LevelTable, facet_shape, level_table, positions_by_sort
from fraisse.errors import IncoherentProblemError, SignatureMismatchError
from fraisse.problems import AmalgProblem, CoherenceViolation, check_coherence
from fraisse.structures import literal
from fraisse.structures.structure import FinStructure, restrict_positions

logger = logging.getLogger(__name__)

__all__ = [
    "AmalgProblem",
    "AmalgReport",
    "CoherenceViolation",
    "ExpansionReport",
    "GeneralProblem",
    "PartialSolution",
    "all_solutions",
    "certify_levels",
    "check_basic_disjoint_k_amalgamation",
    "check_coherence",
    "check_fraisse_expansion",
    "disjoint_amalgam",
    "failing_levels",
    "is_solvable",
    "reduce_to_basic",
    "solve_general",
    "solve_partial",
]


def shapes_of_size(n_sorts: int, k: int) -> List[Tuple[int, ...]]:
    """Every size vector with total k, lexicographically."""
    return sorted(c for c in product(range(k + 1), repeat=n_sorts) if sum(c) == k)


# -- basic amalgamation -----------------------------------------------------


@dataclass
class AmalgReport:
    spec_name: str
    level: int
    holds: bool = True
    families: int = 0
    min_completions: Optional[int] = None
    max_completions: Optional[int] = None
    witness: Optional[AmalgProblem] = None
    note: str = ""

    def record(self, completions: int):
        self.families += 1
        if self.min_completions is None or completions < self.min_completions:
            self.min_completions = completions
        if self.max_completions is None or completions > self.max_completions:
            self.max_completions = completions

    def to_dict(self) -> dict:
        return {
            "class": self.spec_name,
            "level": self.level,
            "holds": self.holds,
            "families": self.families,
            "min_completions": self.min_completions,
            "max_completions": self.max_completions,
            "witness": self.witness.to_dict() if self.witness is not None else None,
            "note": self.note,
        }


def iter_facet_families(table: LevelTable, counts: Tuple[int, ...]) -> Iterator[Tuple[FinStructure, ...]]:
    """Coherent choices of facet types on shape ``counts``, in canonical order.

    Facet i is the domain minus flat position i; two facets must agree on
    the intersection of their domains.
    """
    k = sum(counts)
    levels = [table.level(facet_shape(counts, i)) for i in range(k)]
    overlaps: Dict[tuple, FinStructure] = {}

    def overlap(i, T, j):
        key = (i, j, T)
        value = overlaps.get(key)
        if value is None:
            local = j if j < i else j - 1
            value = overlaps[key] = restrict_positions(T, [p for p in range(k - 1) if p != local])
        return value

    chosen: List[FinStructure] = []

    def extend(i):
        if i == k:
            yield tuple(chosen)
            return
        for T in levels[i]:
            if all(overlap(i, T, j) == overlap(j, chosen[j], i) for j in range(i)):
                chosen.append(T)
                yield from extend(i + 1)
                chosen.pop()

    yield from extend(0)


def _witness(spec: ClassSpec, counts: Tuple[int, ...], facets: Sequence[FinStructure]) -> AmalgProblem:
    k = sum(counts)
    ground = frozenset(range(k))
    tops = {ground - {i}: T for i, T in enumerate(facets)}
    return AmalgProblem.from_top_types(spec, positions_by_sort(counts), tops)


def check_basic_disjoint_k_amalgamation(spec: ClassSpec, k: int, guard: Optional[int] = None) -> AmalgReport:
    """Complete every coherent family on the proper subsets of a k-set, or report the first that fails."""
    table = level_table(spec, guard)
    report = AmalgReport(spec.name, k)
    if k <= 0:
        report.note = "vacuous"
    elif k > spec.width():
        report.note = f"above the class width {spec.width()}: every coherent family has its union as completion"
    else:
        for counts in shapes_of_size(len(spec.signature.sorts), k):
            for facets in iter_facet_families(table, counts):
                found = len(table.completions_of_family(counts, facets))
                report.record(found)
                if found == 0:
                    report.holds = False
                    report.witness = _witness(spec, counts, facets)
                    break
            if not report.holds:
                break
    table.certificates[k] = report.holds
    if report.holds:
        logger.info(f"{spec.name}: basic disjoint {k}-amalgamation holds ({report.families} families)")
    else:
        logger.info(f"{spec.name}: basic disjoint {k}-amalgamation fails after {report.families} families")
    return report


def certify_levels(spec: ClassSpec, up_to: int, guard: Optional[int] = None) -> List[AmalgReport]:
    return [check_basic_disjoint_k_amalgamation(spec, k, guard) for k in range(2, up_to + 1)]


def failing_levels(spec: ClassSpec, up_to: int, guard: Optional[int] = None) -> List[int]:
    """Levels 2..up_to at which basic disjoint amalgamation fails (cached per class)."""
    table = level_table(spec, guard)
    failing = []
    for k in range(2, up_to + 1):
        if k not in table.certificates:
            check_basic_disjoint_k_amalgamation(spec, k, guard)
        if not table.certificates[k]:
            failing.append(k)
    return failing


# -- partial problems -------------------------------------------------------


@dataclass
class PartialSolution:
    """Outcome of solve_partial.

    ``dead_end`` is the first subset met whose completion set was empty; it
    certifies failure when no solution exists.
    """

    problem: AmalgProblem
    policy: str
    solution: Optional[FinStructure] = None
    family: Optional[AmalgProblem] = None
    dead_end: Optional[Tuple[int, ...]] = None
    solutions: List[FinStructure] = field(default_factory=list)
    steps: int = 0

    @property
    def solved(self) -> bool:
        return self.solution is not None

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "solved": self.solved,
            "solution": literal.dumps(self.solution) if self.solution is not None else None,
            "dead_end": list(self.dead_end) if self.dead_end is not None else None,
            "solutions": len(self.solutions),
            "steps": self.steps,
        }


def _search(
    P: AmalgProblem,
    policy: str,
    rng: Optional[Generator],
    guard: Optional[int],
    stop_at_first: bool,
) -> PartialSolution:
    coherent, violation = check_coherence(P)
    if not coherent:
        raise IncoherentProblemError(violation)
    if frozenset() not in P.family:
        P = P.with_type(frozenset(), FinStructure.empty(P.spec.signature))

    table = level_table(P.spec, guard)
    result = PartialSolution(P, policy)
    ground = P.ground
    missing = P.missing_subsets()
    types = dict(P.family)
    backtrack = policy == POLICY_EXHAUSTIVE

    def options(S):
        result.steps += 1
        found = table.completions_of_family(P.counts(S), tuple(types[F] for F in P.facets(S)))
        if not found and result.dead_end is None:
            result.dead_end = tuple(sorted(S))
        if policy == POLICY_UNIFORM and len(found) > 1:
            return (found[int(rng.integers(len(found)))],)
        return found

    def extend(index) -> bool:
        if index == len(missing):
            top = types[ground]
            if not result.solutions:
                result.solution = top
                result.family = AmalgProblem(P.spec, P.sorts, dict(types))
            result.solutions.append(top)
            return stop_at_first
        S = missing[index]
        for T in options(S):
            types[S] = T
            if extend(index + 1):
                return True
            if not backtrack:
                break
        types.pop(S, None)
        return False

    if ground in types and not P.spec.is_member(types[ground])[0]:
        result.dead_end = tuple(sorted(ground))
    else:
        extend(0)
    if result.solved:
        result.dead_end = None
    logger.debug(f"solve_partial({P}, {policy}): solved={result.solved} after {result.steps} steps")
    return result


def solve_partial(
    P: AmalgProblem,
    policy: str = POLICY_FIRST,
    rng: Optional[Generator] = None,
    guard: Optional[int] = None,
) -> PartialSolution:
    """Fill the subsets missing from P level by level.

    ``first`` takes the first completion in canonical order and ``uniform``
    a uniformly random one; neither backtracks, so the first empty
    completion set is returned as ``dead_end``. ``exhaustive`` searches
    every choice and collects all solutions.
    """
    if policy not in SOLVE_POLICIES:
        raise ValueError(f"Unknown policy {policy!r}; expected one of {SOLVE_POLICIES}")
    if policy == POLICY_UNIFORM and rng is None:
        raise ValueError("The uniform policy needs a random generator")
    return _search(P, policy, rng, guard, stop_at_first=policy != POLICY_EXHAUSTIVE)


def is_solvable(P: AmalgProblem, guard: Optional[int] = None) -> bool:
    """Whether some choice of types for the missing subsets completes P."""
    return _search(P, POLICY_EXHAUSTIVE, None, guard, stop_at_first=True).solved


def all_solutions(P: AmalgProblem, guard: Optional[int] = None) -> List[FinStructure]:
    return solve_partial(P, POLICY_EXHAUSTIVE, guard=guard).solutions


# -- problems over a finite base ---------------------------------------------


@dataclass(frozen=True, eq=False)
class GeneralProblem:
    """Disjoint amalgamation over a finite base structure.

    Variables list the base elements in flat order, then the elements of
    each tuple in turn. ``family[S]`` is the type of the base together with
    the tuples indexed by S (the variables in that order); ``family[{}]``
    is the base itself.
    """

    spec: ClassSpec
    base: FinStructure
    tuple_sorts: Tuple[Tuple[int, ...], ...]
    family: Mapping[FrozenSet[int], FinStructure]

    def __post_init__(self):
        object.__setattr__(self, "tuple_sorts", tuple(tuple(int(s) for s in t) for t in self.tuple_sorts))
        object.__setattr__(self, "family", {frozenset(S): T for S, T in dict(self.family).items()})

    @property
    def sorts(self) -> Tuple[int, ...]:
        head = tuple(positions_by_sort(self.base.sizes))
        return head + tuple(s for t in self.tuple_sorts for s in t)

    def variables(self, S) -> List[int]:
        result = list(range(self.base.size))
        offset = self.base.size
        for index, sorts in enumerate(self.tuple_sorts):
            if index in S:
                result.extend(range(offset, offset + len(sorts)))
            offset += len(sorts)
        return result


def reduce_to_basic(problem: GeneralProblem) -> AmalgProblem:
    """The partial basic problem whose solutions are the solutions of ``problem``."""
    base = problem.base
    if base.signature != problem.spec.signature:
        raise SignatureMismatchError("Base structure is not over the class signature")
    if problem.family.get(frozenset()) != base:
        raise IncoherentProblemError(CoherenceViolation((), (), "the type of the empty tuple set must be the base"))
    m = len(problem.tuple_sorts)
    tops = {}
    for S, T in problem.family.items():
        if any(not 0 <= i < m for i in S):
            raise ValueError(f"Family mentions tuples {sorted(S)} outside 0..{m - 1}")
        tops[frozenset(problem.variables(S))] = T
    reduced = AmalgProblem(problem.spec, problem.sorts, {})
    for V, T in tops.items():
        if T.sizes != reduced.counts(V):
            raise ValueError(f"Type on variables {sorted(V)} has shape {T.sizes}, expected {reduced.counts(V)}")
    reduced = AmalgProblem.from_top_types(problem.spec, problem.sorts, tops)
    coherent, violation = check_coherence(reduced)
    if not coherent:
        raise IncoherentProblemError(violation)
    logger.debug(f"Reduced a problem over a base of {base.size} elements and {m} tuples to {reduced}")
    return reduced


def solve_general(
    problem: GeneralProblem,
    policy: str = POLICY_FIRST,
    rng: Optional[Generator] = None,
    guard: Optional[int] = None,
) -> PartialSolution:
    """Solve a problem over a finite base through its basic reduction."""
    return solve_partial(reduce_to_basic(problem), policy, rng, guard)


def disjoint_amalgam(
    spec: ClassSpec,
    A: FinStructure,
    B: FinStructure,
    C: FinStructure,
    policy: str = POLICY_FIRST,
    rng: Optional[Generator] = None,
    guard: Optional[int] = None,
) -> PartialSolution:
    """Amalgamate B and C disjointly over A.

    A is the substructure of B and of C on the first ``A.sizes[s]``
    elements of each sort s. In the solution the elements of A come first,
    then the new elements of B, then those of C (per sort).
    """
    for M in (B, C):
        if any(m < a for m, a in zip(M.sizes, A.sizes)):
            raise ValueError(f"Structure of shape {M.sizes} cannot extend a base of shape {A.sizes}")

    def extra(M):
        return tuple(s for s, (m, a) in enumerate(zip(M.sizes, A.sizes)) for _ in range(m - a))

    problem = GeneralProblem(spec, A, (extra(B), extra(C)), {frozenset(): A, frozenset({0}): B, frozenset({1}): C})
    return solve_general(problem, policy, rng, guard)


# -- Fraisse expansions -----------------------------------------------------


@dataclass
class ExpansionReport:
    """Bounded check that one class is a Fraisse expansion of another.

    On failure ``clause`` is 1 when reducts and members disagree (``base``
    is the offending structure, ``expanded`` its expansion if any) and 2
    when the expansion ``expanded`` of a one-point extension's smaller side
    does not lift to any expansion of ``base``.
    """

    spec_name: str
    expansion_name: str
    up_to: int
    holds: bool = True
    clause: Optional[int] = None
    base: Optional[FinStructure] = None
    expanded: Optional[FinStructure] = None
    checked: int = 0

    def to_dict(self) -> dict:
        return {
            "class": self.spec_name,
            "expansion": self.expansion_name,
            "up_to": self.up_to,
            "holds": self.holds,
            "clause": self.clause,
            "base": literal.dumps(self.base) if self.base is not None else None,
            "expanded": literal.dumps(self.expanded) if self.expanded is not None else None,
            "checked": self.checked,
        }


def check_fraisse_expansion(
    spec: ClassSpec,
    expansion: ClassSpec,
    up_to: int,
    guard: Optional[int] = None,
) -> ExpansionReport:
    """Check both expansion conditions on every domain with at most ``up_to`` elements."""
    if not expansion.signature.extends(spec.signature):
        raise SignatureMismatchError(f"{expansion.name} does not extend the signature of {spec.name}")
    base_table = level_table(spec, guard)
    expanded_table = level_table(expansion, guard)
    report = ExpansionReport(spec.name, expansion.name, up_to)
    by_reduct: Dict[Tuple[int, ...], Dict[FinStructure, List[FinStructure]]] = {}

    def expansions_on(counts):
        if counts not in by_reduct:
            index: Dict[FinStructure, List[FinStructure]] = {}
            for M in expanded_table.level(counts):
                index.setdefault(M.reduct(spec.signature), []).append(M)
            by_reduct[counts] = index
        return by_reduct[counts]

    def fail(clause, base, expanded=None):
        report.holds, report.clause, report.base, report.expanded = False, clause, base, expanded
        logger.info(f"{expansion.name} is not a Fraisse expansion of {spec.name} (condition {clause})")
        return report

    n_sorts = len(spec.signature.sorts)
    for total in range(up_to + 1):
        for counts in shapes_of_size(n_sorts, total):
            members = base_table.level(counts)
            index = expansions_on(counts)
            member_set = set(members)
            for reduct, lifted in index.items():
                if reduct not in member_set:
                    return fail(1, reduct, lifted[0])
            for B in members:
                report.checked += 1
                if B not in index:
                    return fail(1, B)
            offsets = FinStructure.empty(spec.signature, counts).offsets
            for B in members:
                for sort, size in enumerate(counts):
                    if size == 0:
                        continue
                    last = offsets[sort] + size - 1
                    kept = [p for p in range(total) if p != last]
                    A = restrict_positions(B, kept)
                    lifts = {restrict_positions(Bx, kept) for Bx in index[B]}
                    for Ax in expansions_on(A.sizes).get(A, []):
                        report.checked += 1
                        if Ax not in lifts:
                            return fail(2, B, Ax)
    logger.info(f"{expansion.name} is a Fraisse expansion of {spec.name} up to size {up_to}")
    return report
