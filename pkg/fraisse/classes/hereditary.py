"""
Bounded check that a class is closed under induced substructures.

Candidates are built block by block from the class's block plans without
assuming the class is hereditary, so a constraint that is not universal is
caught. The plans only discard blocks that no member can contain, hence
every member of the requested sizes is among the candidates.
"""

import logging
from itertools import combinations, product
from math import prod
from typing import Iterator, List, Optional, Set, Tuple

from fraisse.classes.spec import ClassSpec
from fraisse.constants import DEFAULT_ENUMERATION_GUARD
from fraisse.enumeration import Instance, LevelTable, level_table, positions_by_sort
from fraisse.errors import GuardExceededError
from fraisse.logic.axioms import shapes_up_to
from fraisse.structures.structure import FinStructure, restrict_positions

logger = logging.getLogger(__name__)


def _subset_maps(sizes: Tuple[int, ...], S: Tuple[int, ...]) -> Tuple[Tuple[int, ...], Tuple[Tuple[int, ...], ...]]:
    """Shape of S and, per sort, the within-sort indices of S's elements."""
    sort_of = positions_by_sort(sizes)
    offsets = [sum(sizes[:s]) for s in range(len(sizes))]
    per_sort: List[List[int]] = [[] for _ in sizes]
    for p in S:
        per_sort[sort_of[p]].append(p - offsets[sort_of[p]])
    return tuple(len(indices) for indices in per_sort), tuple(tuple(indices) for indices in per_sort)


def iter_candidates(table: LevelTable, sizes: Tuple[int, ...]) -> Iterator[FinStructure]:
    """Every structure on ``sizes`` assembled from admissible blocks."""
    signature = table.signature
    profiles = [signature.profile_indices(r.name) for r in signature.relations]
    k = sum(sizes)
    subsets = [S for size in range(1, k + 1) for S in combinations(range(k), size)]
    blocks = []
    for S in subsets:
        counts, maps = _subset_maps(sizes, S)
        blocks.append((table.plan(counts), maps))

    total = prod(len(plan.options) for plan, _ in blocks)
    if total > 1 << table.guard:
        raise GuardExceededError(f"hereditary candidates on {list(sizes)}", total, 1 << table.guard)

    def mapped(maps, r, fact):
        return r, tuple(maps[s][i] for s, i in zip(profiles[r], fact))

    for choice in product(*(range(len(plan.options)) for plan, _ in blocks)):
        true: Set[Instance] = set()
        for (plan, maps), index in zip(blocks, choice):
            true.update(mapped(maps, r, fact) for r, fact in plan.forced)
            true.update(mapped(maps, r, fact) for r, fact in plan.options[index])
            for _, r, fact, rule in plan.derived:
                if rule(lambda r2, fact2, maps=maps: mapped(maps, r2, fact2) in true):
                    true.add(mapped(maps, r, fact))
        yield table.structure(sizes, true)


def check_hereditary(
    spec: ClassSpec, up_to: int, guard: Optional[int] = None
) -> Tuple[bool, Optional[Tuple[FinStructure, FinStructure]]]:
    """``(True, None)`` or ``(False, (member, substructure that is not a member))``.

    Removing one element at a time is enough: the members of every smaller
    size are checked as well.
    """
    if up_to < 0:
        raise ValueError(f"up_to must be non-negative, got {up_to}")
    table = level_table(spec, DEFAULT_ENUMERATION_GUARD if guard is None else guard)
    checked = 0
    for sizes in shapes_up_to(len(spec.signature.sorts), up_to):
        for M in iter_candidates(table, sizes):
            if not spec.is_member(M)[0]:
                continue
            checked += 1
            for removed in range(M.size):
                sub = restrict_positions(M, [p for p in range(M.size) if p != removed])
                member, violation = spec.is_member(sub)
                if not member:
                    logger.info(f"{spec.name} is not hereditary: {violation}")
                    return False, (M, sub)
    logger.info(f"{spec.name}: {checked} members up to size {up_to} are closed under substructures")
    return True, None
