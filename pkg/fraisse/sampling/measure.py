"""
Random structures on a fixed domain.

``LevelSampler`` draws from the level-by-level measure: every subset of the
domain, smallest first and lexicographically within a size, gets a type
drawn uniformly from the completions of the family its proper subsets
already carry. In bounded mode the levels stop at n and each relation
instance with more than n distinct elements is a fair coin.

When the class is not known to amalgamate, levels at which basic disjoint
amalgamation fails are looked ahead: a candidate type for S is kept only if
each superset of a failing size, whose last subset of S's size is S, can
still be completed.
"""

import logging
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from fraisse.amalgamation import failing_levels, is_solvable
from fraisse.classes.spec import ClassSpec
from fraisse.constants import (
    DEFAULT_BELL_TABLE_MAX,
    DEFAULT_CERTIFY_MAX_LEVEL,
    MODE_BOUNDED,
    MODE_UNBOUNDED,
    MODE_UNIFORM_EXHAUSTIVE,
    MODE_UNIFORM_PARTITIONS,
    SAMPLER_MODES,
)
from fraisse.enumeration import level_table, partition_components, positions_by_sort
from fraisse.errors import AmalgamationFailure
from fraisse.logic.axioms import is_one_point_extension
from fraisse.problems import AmalgProblem
from fraisse.sampling.rng import make_rng, uniform_below
from fraisse.structures.structure import (
    FinStructure,
    SizesLike,
    fact_support,
    full_support_facts,
    instances,
    normalize_sizes,
    restrict_positions,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplerConfig:
    """What to sample.

    Attributes:
        spec: the class
        sizes: domain size per sort
        mode: one of SAMPLER_MODES
        seed: master seed of the random streams
        trial_index: which trial of that seed
        bound: n for the bounded mode
        lookahead_levels: failing levels to look ahead at; None detects them
        verify: check membership of every unbounded sample
        certify_max_level: highest level auto-detection examines
        guard: enumeration guard (None for the default)
        bell_bound: largest n the Bell number table of the partition modes covers
    """

    spec: ClassSpec
    sizes: SizesLike
    mode: str = MODE_UNBOUNDED
    seed: int = 0
    trial_index: int = 0
    bound: Optional[int] = None
    lookahead_levels: Optional[Tuple[int, ...]] = None
    verify: bool = False
    certify_max_level: int = DEFAULT_CERTIFY_MAX_LEVEL
    guard: Optional[int] = None
    bell_bound: int = DEFAULT_BELL_TABLE_MAX

    def __post_init__(self):
        sizes = normalize_sizes(self.spec.signature, self.sizes)
        if any(n < 1 for n in sizes):
            raise ValueError(f"Sampling needs a positive size for every sort, got {sizes}")
        object.__setattr__(self, "sizes", sizes)
        if self.mode not in SAMPLER_MODES:
            raise ValueError(f"Unknown sampler mode {self.mode!r}; expected one of {SAMPLER_MODES}")
        if self.mode == MODE_BOUNDED and (self.bound is None or self.bound < 1):
            raise ValueError("Bounded mode needs a positive bound n")
        if self.seed < 0 or self.trial_index < 0:
            raise ValueError("Seed and trial index must be non-negative")
        if self.lookahead_levels is not None:
            object.__setattr__(self, "lookahead_levels", tuple(sorted(set(int(j) for j in self.lookahead_levels))))

    def for_trial(self, trial_index: int, seed: Optional[int] = None) -> "SamplerConfig":
        return replace(self, trial_index=trial_index, seed=self.seed if seed is None else seed)


class LevelSampler:
    """Sampler for the unbounded and bounded level-by-level measures of one config."""

    def __init__(self, cfg: SamplerConfig):
        if cfg.mode not in (MODE_UNBOUNDED, MODE_BOUNDED):
            raise ValueError(f"LevelSampler handles {MODE_UNBOUNDED} and {MODE_BOUNDED}, not {cfg.mode}")
        self.cfg = cfg
        self.spec = cfg.spec
        self.table = level_table(cfg.spec, cfg.guard)
        self.sizes = cfg.sizes
        self.size = sum(self.sizes)
        self.sort_of = positions_by_sort(self.sizes)
        self.offsets = FinStructure.empty(self.spec.signature, self.sizes).offsets
        max_arity = self.spec.max_arity
        self._coin_instances = None
        if cfg.mode == MODE_BOUNDED:
            if not self.spec.certified_amalgamation:
                failing = failing_levels(self.spec, cfg.bound, cfg.guard)
                if failing:
                    raise ValueError(
                        f"Bounded mode needs basic disjoint amalgamation up to {cfg.bound}; "
                        f"{self.spec.name} fails at levels {failing}"
                    )
            self.top = min(cfg.bound, max_arity)
            self.lookahead: List[int] = []
        else:
            self.top = max_arity
            self.lookahead = self._lookahead_levels()
        self.check_membership = cfg.mode == MODE_UNBOUNDED and (cfg.verify or not self.spec.certified_amalgamation)
        self._shapes: Dict[tuple, Tuple[int, ...]] = {}

    def _lookahead_levels(self) -> List[int]:
        cfg = self.cfg
        if cfg.lookahead_levels is not None:
            return list(cfg.lookahead_levels)
        if self.spec.certified_amalgamation:
            return []
        width = self.spec.width()
        if width > cfg.certify_max_level:
            logger.warning(
                f"{self.spec.name}: amalgamation is only checked up to level {cfg.certify_max_level}, "
                f"below the class width {width}"
            )
        levels = failing_levels(self.spec, min(width, cfg.certify_max_level), cfg.guard)
        if levels:
            logger.info(f"{self.spec.name}: looking ahead at failing levels {levels}")
        return levels

    def shape(self, S: Sequence[int]) -> Tuple[int, ...]:
        key = tuple(S)
        counts = self._shapes.get(key)
        if counts is None:
            values = [0] * len(self.sizes)
            for p in S:
                values[self.sort_of[p]] += 1
            counts = self._shapes[key] = tuple(values)
        return counts

    def _problem(self, U: Sequence[int], types: Dict[tuple, FinStructure], top: int) -> AmalgProblem:
        local = {p: i for i, p in enumerate(U)}
        family = {}
        for size in range(top + 1):
            for V in combinations(U, size):
                if V in types:
                    family[frozenset(local[p] for p in V)] = types[V]
        return AmalgProblem(self.spec, tuple(self.sort_of[p] for p in U), family)

    def _solvable(self, U: Tuple[int, ...], level: int, types: Dict[tuple, FinStructure]) -> bool:
        if len(U) == level + 1:
            facets = tuple(types[U[:i] + U[i + 1:]] for i in range(len(U)))
            return bool(self.table.completions_of_family(self.shape(U), facets))
        return is_solvable(self._problem(U, types, level), self.cfg.guard)

    def _viable(self, S: Tuple[int, ...], options, types) -> List[FinStructure]:
        level = len(S)
        kept = []
        for T in options:
            types[S] = T
            if all(
                self._solvable(X + S, level, types)
                for j in self.lookahead
                if j > level
                for X in combinations(range(S[0]), j - level)
            ):
                kept.append(T)
        types.pop(S, None)
        return kept

    def coin_instances(self) -> List[Tuple[int, tuple]]:
        """Relation instances with more than n distinct elements (bounded mode)."""
        if self._coin_instances is None:
            signature = self.spec.signature
            n = self.cfg.bound
            self._coin_instances = [
                (r, fact) for r, fact in instances(signature, self.sizes) if len(fact_support(signature, r, fact)) > n
            ]
        return self._coin_instances

    def sample(self, trial_index: Optional[int] = None, seed: Optional[int] = None) -> FinStructure:
        """One draw; ``trial_index`` and ``seed`` override the config's."""
        cfg = self.cfg
        trial = cfg.trial_index if trial_index is None else trial_index
        seed = cfg.seed if seed is None else seed
        signature = self.spec.signature
        types: Dict[tuple, FinStructure] = {(): FinStructure.empty(signature)}
        for level in range(1, min(self.top, self.size) + 1):
            rng = make_rng(seed, trial, level)
            for S in combinations(range(self.size), level):
                facets = tuple(types[S[:j] + S[j + 1:]] for j in range(level))
                options = self.table.completions_of_family(self.shape(S), facets)
                if len(options) > 1 and self.lookahead:
                    options = self._viable(S, options, types)
                if not options:
                    witness = self._problem(S, types, level - 1)
                    raise AmalgamationFailure(level, witness, f"no completion for elements {list(S)}")
                types[S] = options[int(rng.integers(len(options)))] if len(options) > 1 else options[0]

        facts = [set() for _ in signature.relations]
        for S, T in types.items():
            if not S:
                continue
            for r, fact in full_support_facts(T):
                profile = signature.profile_indices(signature.relations[r].name)
                facts[r].add(tuple(S[T.offsets[s] + i] - self.offsets[s] for s, i in zip(profile, fact)))
        if cfg.mode == MODE_BOUNDED:
            coins = self.coin_instances()
            if coins:
                flips = make_rng(seed, trial, cfg.bound + 1).integers(0, 2, size=len(coins))
                for (r, fact), flip in zip(coins, flips):
                    if flip:
                        facts[r].add(fact)
        M = FinStructure.trusted(signature, self.sizes, tuple(frozenset(f) for f in facts))

        if self.check_membership:
            member, violation = self.spec.is_member(M)
            if not member:
                raise AmalgamationFailure(len(violation.witness), None, str(violation))
        return M


def sample_mu_N(cfg: SamplerConfig) -> FinStructure:
    """One draw from the level-by-level measure (unbounded or bounded mode)."""
    return LevelSampler(cfg).sample()


def sample_uniform_member(
    spec: ClassSpec,
    sizes: SizesLike,
    seed: int,
    trial_index: int = 0,
    mode: Optional[str] = None,
    guard: Optional[int] = None,
    bell_bound: int = DEFAULT_BELL_TABLE_MAX,
) -> FinStructure:
    """Exact uniform draw from K(sizes)."""
    sizes = normalize_sizes(spec.signature, sizes)
    if mode is None:
        mode = MODE_UNIFORM_PARTITIONS if spec.is_partition_class() else MODE_UNIFORM_EXHAUSTIVE
    rng = make_rng(seed, trial_index)
    table = level_table(spec, guard)
    if mode == MODE_UNIFORM_PARTITIONS:
        true = set()
        for component in partition_components(spec, sizes, bell_bound):
            true |= component.facts(component.sample(rng))
        return table.structure(sizes, true)
    if mode == MODE_UNIFORM_EXHAUSTIVE:
        members = table.level(sizes)
        if not members:
            raise ValueError(f"{spec.name} has no members on {list(sizes)}")
        return members[uniform_below(len(members), rng)]
    raise ValueError(f"Mode {mode!r} is not a uniform sampling mode")


def sample(cfg: SamplerConfig) -> FinStructure:
    if cfg.mode in (MODE_UNBOUNDED, MODE_BOUNDED):
        return sample_mu_N(cfg)
    return sample_uniform_member(cfg.spec, cfg.sizes, cfg.seed, cfg.trial_index, cfg.mode, cfg.guard, cfg.bell_bound)


def extension_epsilon(
    spec: ClassSpec,
    A: FinStructure,
    B: FinStructure,
    bounded_n: Optional[int] = None,
    guard: Optional[int] = None,
) -> float:
    """Probability that a fixed new element realizes B over a copy of A.

    The product of ``1/|completions|`` over the subsets of B containing the
    new element (up to the sampled levels), times ``2^-m`` for the m
    coin-decided instances in the bounded case.
    """
    sort = is_one_point_extension(A, B)
    if sort is None:
        raise ValueError("B is not a one-point extension of A")
    table = level_table(spec, guard)
    new = B.offsets[sort] + B.sizes[sort] - 1
    top = spec.max_arity if bounded_n is None else min(bounded_n, spec.max_arity)
    others = [p for p in range(B.size) if p != new]
    epsilon = 1.0
    for level in range(1, min(top, B.size) + 1):
        for rest in combinations(others, level - 1):
            S = tuple(sorted(rest + (new,)))
            T = restrict_positions(B, S)
            facets = tuple(restrict_positions(T, [i for i in range(level) if i != j]) for j in range(level))
            found = table.completions_of_family(T.sizes, facets)
            if T not in found:
                raise ValueError(f"B's type on positions {list(S)} is not a completion of its family")
            epsilon /= len(found)
    if bounded_n is not None:
        signature = B.signature
        element = B.element_at(new)
        coins = sum(
            1
            for r, fact in instances(signature, B.sizes)
            if len(fact_support(signature, r, fact)) > bounded_n and element in fact_support(signature, r, fact)
        )
        epsilon /= 2 ** coins
    return epsilon


def failure_bound(a: int, epsilon: float, N: int) -> float:
    """``N^a (1 - epsilon)^(N - a)``: chance that some copy of an a-element structure has no extension."""
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must be in (0, 1], got {epsilon}")
    if a < 0 or N <= a:
        raise ValueError(f"Need 0 <= |A| < N, got |A|={a}, N={N}")
    return float(N) ** a * (1.0 - epsilon) ** (N - a)
