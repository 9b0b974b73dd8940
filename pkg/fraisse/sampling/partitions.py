"""
Set partitions: enumeration, exact counts and exact uniform sampling.

Partitions of ``range(n)`` are written as restricted growth strings
(``rgs[i]`` is the block of element i, blocks numbered by first
appearance) or as a list of sorted blocks.
"""

import logging
import threading
from typing import Iterator, List, Optional, Sequence, Tuple

from numpy.random import Generator
from scipy.special import comb

from fraisse.constants import DEFAULT_BELL_TABLE_MAX
from fraisse.errors import GuardExceededError
from fraisse.sampling.rng import make_rng, uniform_below

logger = logging.getLogger(__name__)


def iter_set_partitions(n: int, max_blocks: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Restricted growth strings of length n, lexicographically, with at most ``max_blocks`` blocks."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        yield ()
        return
    limit = n if max_blocks is None else max_blocks
    if limit < 1:
        return
    rgs = [0] * n

    def extend(position, blocks):
        if position == n:
            yield tuple(rgs)
            return
        for block in range(min(blocks + 1, limit)):
            rgs[position] = block
            yield from extend(position + 1, max(blocks, block + 1))

    rgs[0] = 0
    yield from extend(1, 1)


def blocks_of(rgs: Sequence[int]) -> List[List[int]]:
    blocks: List[List[int]] = []
    for element, block in enumerate(rgs):
        if block == len(blocks):
            blocks.append([])
        blocks[block].append(element)
    return blocks


def rgs_of(blocks: Sequence[Sequence[int]], n: int) -> Tuple[int, ...]:
    """Restricted growth string of a partition given as blocks."""
    owner = {}
    for index, block in enumerate(blocks):
        for element in block:
            owner[element] = index
    relabel = {}
    result = []
    for element in range(n):
        block = owner[element]
        relabel.setdefault(block, len(relabel))
        result.append(relabel[block])
    return tuple(result)


class PartitionSampler:
    """Exact Bell and Stirling tables with uniform partition sampling.

    The Bell table is built with the Bell triangle up to ``bound`` on demand.
    """

    def __init__(self, bound: int = DEFAULT_BELL_TABLE_MAX):
        if bound < 1:
            raise ValueError(f"Bell table bound must be positive, got {bound}")
        self.bound = bound
        self._bell: List[int] = [1]
        self._row: List[int] = [1]
        self._stirling: dict = {}
        self._lock = threading.Lock()

    def _check_bound(self, n: int):
        if n > self.bound:
            raise GuardExceededError("Bell table size", n, self.bound)
        if n < 0:
            raise ValueError("n must be non-negative")

    def bell(self, n: int) -> int:
        self._check_bound(n)
        with self._lock:
            while len(self._bell) <= n:
                row = [self._row[-1]]
                for value in self._row:
                    row.append(row[-1] + value)
                self._row = row
                self._bell.append(row[0])
        return self._bell[n]

    def table(self, n: Optional[int] = None) -> List[int]:
        """B_0..B_n (default: the whole bound)."""
        n = self.bound if n is None else n
        self.bell(n)
        return list(self._bell[: n + 1])

    def stirling_row(self, m: int, max_blocks: int) -> List[int]:
        """[S(m, 0), ..., S(m, max_blocks)]."""
        self._check_bound(m)
        with self._lock:
            rows = self._stirling.setdefault(max_blocks, [[1] + [0] * max_blocks])
            while len(rows) <= m:
                previous = rows[-1]
                row = [0] * (max_blocks + 1)
                for j in range(1, max_blocks + 1):
                    row[j] = j * previous[j] + previous[j - 1]
                rows.append(row)
            return rows[m]

    def stirling2(self, m: int, j: int) -> int:
        if j < 0 or j > m:
            return 0
        return self.stirling_row(m, j)[j]

    def count(self, n: int, max_blocks: Optional[int] = None) -> int:
        """Partitions of an n-set, optionally with at most ``max_blocks`` blocks."""
        if max_blocks is None or max_blocks >= n:
            return self.bell(n)
        return sum(self.stirling_row(n, max_blocks))

    def sample(self, n: int, rng: Generator) -> Tuple[int, ...]:
        """Uniform partition of range(n) as a restricted growth string."""
        self.bell(n)
        remaining = list(range(n))
        blocks: List[List[int]] = []
        while remaining:
            m = len(remaining)
            target = uniform_below(self._bell[m], rng)
            j, cumulative = 0, 0
            while True:
                cumulative += comb(m - 1, j, exact=True) * self._bell[m - 1 - j]
                if target < cumulative:
                    break
                j += 1
            rest = remaining[1:]
            chosen = sorted(int(i) for i in rng.choice(len(rest), size=j, replace=False)) if j else []
            block = [remaining[0]] + [rest[i] for i in chosen]
            blocks.append(block)
            taken = set(block)
            remaining = [e for e in remaining if e not in taken]
        return rgs_of(blocks, n)

    def sample_bounded(self, n: int, max_blocks: int, rng: Generator) -> Tuple[int, ...]:
        """Uniform partition of range(n) into at most ``max_blocks`` blocks."""
        if max_blocks < 1:
            raise ValueError("max_blocks must be positive")
        if n == 0:
            return ()
        if max_blocks >= n:
            return self.sample(n, rng)
        row = self.stirling_row(n, max_blocks)
        target = uniform_below(sum(row), rng)
        blocks = 0
        for j, count in enumerate(row):
            if target < count:
                blocks = j
                break
            target -= count
        return self.sample_exact_blocks(n, blocks, rng)

    def sample_exact_blocks(self, n: int, blocks: int, rng: Generator) -> Tuple[int, ...]:
        """Uniform partition of range(n) into exactly ``blocks`` blocks."""
        if not 0 <= blocks <= n or self.stirling2(n, blocks) == 0:
            raise ValueError(f"No partition of {n} elements into {blocks} blocks")
        self.stirling_row(n, blocks)
        table = self._stirling[blocks]

        def stirling(m, j):
            return table[m][j] if 0 <= j <= blocks else 0

        # decide elements from last to first, then replay forwards
        decisions = []
        m, j = n, blocks
        while m > 0:
            singleton = stirling(m - 1, j - 1)
            target = uniform_below(stirling(m, j), rng)
            if target < singleton:
                decisions.append(None)
                j -= 1
            else:
                decisions.append((target - singleton) // stirling(m - 1, j))
            m -= 1
        decisions.reverse()
        rgs = []
        used = 0
        for decision in decisions:
            if decision is None:
                rgs.append(used)
                used += 1
            else:
                rgs.append(decision)
        return tuple(rgs)


_default_sampler: Optional[PartitionSampler] = None
_default_lock = threading.Lock()


def default_sampler(bound: int = DEFAULT_BELL_TABLE_MAX) -> PartitionSampler:
    global _default_sampler
    with _default_lock:
        if _default_sampler is None or _default_sampler.bound < bound:
            _default_sampler = PartitionSampler(bound)
        return _default_sampler


def sample_uniform_partition(n: int, seed: int, trial_index: int = 0, bound: int = DEFAULT_BELL_TABLE_MAX) -> List[List[int]]:
    """Uniform partition of range(n) as a list of sorted blocks."""
    sampler = default_sampler(bound)
    if n > bound:
        raise GuardExceededError("Bell table size", n, bound)
    return blocks_of(sampler.sample(n, make_rng(seed, trial_index)))
