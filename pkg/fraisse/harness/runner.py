"""
Experiment runner.

Every trial has its own seed, derived from the master seed, the size index
and the trial index, so results do not depend on scheduling. Trials run in
fixed batches; with more than one thread a batch is spread over a
QThreadPool and the outcomes land in per-trial slots that are merged in
trial order. A size tier stops early once every interval is narrower than
the configured half-width target.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from PyQt6.QtCore import QObject, QRunnable, QThreadPool, pyqtSignal

from fraisse.classes.catalog import catalog, resolve_class
from fraisse.classes.spec import ClassSpec
from fraisse.constants import (
    APP_VERSION,
    BATTERY_ROW,
    DEFAULT_THREADS,
    MEASURE_MU,
    MODE_BOUNDED,
)
from fraisse.harness.config import ExperimentConfig
from fraisse.harness.stats import half_width, wilson_interval
from fraisse.logic.axioms import ExtensionAxiom, UniversalAxiom, generate_axioms, named_sentence, named_sentence_keys
from fraisse.logic.evaluate import evaluate
from fraisse.logic.parser import parse_sentence
from fraisse.logic.syntax import Formula, check_sorts
from fraisse.sampling.measure import (
    LevelSampler,
    SamplerConfig,
    extension_epsilon,
    failure_bound,
    sample_uniform_member,
)
from fraisse.sampling.rng import derive_seed
from fraisse.structures.signature import Signature
from fraisse.structures.structure import FinStructure

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BatteryItem:
    name: str
    check: Callable[[FinStructure], bool]
    source: object = None


def _sentence_item(sentence: Formula, name: str) -> BatteryItem:
    return BatteryItem(name, lambda M: evaluate(M, sentence), sentence)


def build_battery(spec: ClassSpec, cfg: ExperimentConfig) -> List[BatteryItem]:
    """Sentences and axioms of the config, checked against ``spec``'s signature."""
    items = []
    if cfg.axioms is not None:
        a = cfg.axioms
        axioms = generate_axioms(spec, a.bound, a.mode, a.n, cfg.guard)
        if axioms.note:
            logger.warning(axioms.note)
        if a.universal:
            items.extend(BatteryItem(ax.name, ax.check, ax) for ax in axioms.universal)
        if a.extension:
            items.extend(BatteryItem(ax.name, ax.check, ax) for ax in axioms.extension)
    for index, text in enumerate(cfg.sentences):
        if text in named_sentence_keys():
            sentence = named_sentence(text)
            check_sorts(sentence, spec.signature)
            items.append(_sentence_item(sentence, text))
        else:
            items.append(_sentence_item(parse_sentence(text, spec.signature), f"sentence{index + 1}"))
    if not items:
        raise ValueError("The sentence battery is empty")
    return items


@dataclass
class ResultRow:
    size_index: int
    sizes: Tuple[int, ...]
    sentence: str
    trials: int
    successes: int
    ci_low: float
    ci_high: float
    failure_bound: Optional[float] = None
    wall_time: float = 0.0
    outcomes: Tuple[bool, ...] = field(default=(), repr=False)

    @property
    def estimate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0


@dataclass
class ExperimentResult:
    name: str
    class_name: str
    measure: str
    seed: int
    config_hash: str
    version: str = APP_VERSION
    rows: List[ResultRow] = field(default_factory=list)
    include_timing: bool = False

    def row(self, size_index: int, sentence: str) -> ResultRow:
        for row in self.rows:
            if row.size_index == size_index and row.sentence == sentence:
                return row
        raise KeyError(f"No row for size {size_index} and {sentence}")

    def battery(self) -> List[ResultRow]:
        return [row for row in self.rows if row.sentence == BATTERY_ROW]


class TrialWorker(QRunnable):
    """Runs one trial and stores the outcome (or the exception) in its slot."""

    def __init__(self, job, trial, slots, index):
        super().__init__()
        self.setAutoDelete(False)
        self.job = job
        self.trial = trial
        self.slots = slots
        self.index = index

    def run(self):
        try:
            self.slots[self.index] = self.job(self.trial)
        except Exception as e:
            self.slots[self.index] = e


class ExperimentRunner(QObject):
    """Runs an experiment tier by tier, streaming results through signals.

    Signals:
        tier_started(size_index, sizes)
        tier_finished(size_index, rows)
        experiment_finished(result)
    """

    tier_started = pyqtSignal(int, object)
    tier_finished = pyqtSignal(int, object)
    experiment_finished = pyqtSignal(object)

    def __init__(self, cfg: ExperimentConfig, threads: int = DEFAULT_THREADS):
        super().__init__()
        if threads < 1:
            raise ValueError(f"threads must be at least 1, got {threads}")
        self.cfg = cfg
        self.threads = threads
        if cfg.class_ref is not None:
            self.spec = resolve_class(cfg.class_ref)
            self.member = self.spec
        else:
            family = family_named(cfg.family, **cfg.family_params)
            self.spec = family.sampling(cfg.family_n)
            self.member = family.member(cfg.family_n)
        self.reduct: Optional[Signature] = None if self.member is self.spec else self.member.signature
        self.battery = build_battery(self.member, cfg)
        self.pool = None
        if threads > 1:
            self.pool = QThreadPool()
            self.pool.setMaxThreadCount(threads)
        self._epsilons: Dict[int, Optional[float]] = {}
        logger.info(
            f"Experiment {cfg.name}: {self.spec.name}, {len(self.battery)} sentences, "
            f"{len(cfg.sizes)} sizes, {cfg.trials} trials, {threads} threads"
        )

    # -- trials ---------------------------------------------------------

    def _draw(self, sizes: Tuple[int, ...]) -> Callable[[int, int], FinStructure]:
        cfg = self.cfg
        if cfg.measure == MEASURE_MU:
            sampler = LevelSampler(
                SamplerConfig(
                    self.spec, sizes, mode=cfg.mode, seed=cfg.seed, bound=cfg.bound, verify=cfg.verify, guard=cfg.guard
                )
            )
            return lambda trial, seed: sampler.sample(trial_index=trial, seed=seed)
        return lambda trial, seed: sample_uniform_member(self.spec, sizes, seed, trial_index=trial, guard=cfg.guard)

    def _job(self, size_index: int, sizes: Tuple[int, ...]):
        draw = self._draw(sizes)
        master = self.cfg.seed

        def job(trial):
            M = draw(trial, derive_seed(master, size_index, trial))
            if self.reduct is not None:
                M = M.reduct(self.reduct)
            return tuple(bool(item.check(M)) for item in self.battery)

        return job

    def _run_batch(self, job, trials: Sequence[int]) -> List[Tuple[bool, ...]]:
        if self.pool is None:
            return [job(trial) for trial in trials]
        slots: list = [None] * len(trials)
        workers = [TrialWorker(job, trial, slots, i) for i, trial in enumerate(trials)]
        for worker in workers:
            self.pool.start(worker)
        self.pool.waitForDone()
        for slot in slots:
            if isinstance(slot, BaseException):
                raise slot
        return slots

    def _precise_enough(self, outcomes: List[Tuple[bool, ...]]) -> bool:
        target = self.cfg.half_width_target
        if target <= 0 or not outcomes:
            return False
        n = len(outcomes)
        columns = list(zip(*outcomes)) + [tuple(all(o) for o in outcomes)]
        return all(half_width(sum(column), n) < target for column in columns)

    # -- bounds ---------------------------------------------------------

    def _failure_bound(self, index: int, sizes: Tuple[int, ...]) -> Optional[float]:
        """Theoretical failure bound of an extension axiom under the mu measure."""
        cfg = self.cfg
        axiom = self.battery[index].source
        if (
            cfg.measure != MEASURE_MU
            or not isinstance(axiom, ExtensionAxiom)
            or self.reduct is not None
            or not self.spec.certified_amalgamation
            or len(sizes) != 1
        ):
            return None
        if index not in self._epsilons:
            bounded = cfg.bound if cfg.mode == MODE_BOUNDED else None
            try:
                self._epsilons[index] = extension_epsilon(self.spec, axiom.A, axiom.B, bounded, cfg.guard)
            except ValueError as e:
                logger.debug(f"No epsilon for {axiom.name}: {e}")
                self._epsilons[index] = None
        epsilon = self._epsilons[index]
        N, a = sizes[0], axiom.A.size
        if epsilon is None or N <= a:
            return None
        return min(1.0, failure_bound(a, epsilon, N))

    # -- tiers ----------------------------------------------------------

    def _rows(self, size_index, sizes, outcomes, elapsed) -> List[ResultRow]:
        n = len(outcomes)
        rows = []
        columns = list(zip(*outcomes)) if outcomes else [() for _ in self.battery]
        names = [item.name for item in self.battery]
        for index, (name, column) in enumerate(zip(names + [BATTERY_ROW], columns + [tuple(all(o) for o in outcomes)])):
            successes = sum(column)
            low, high = wilson_interval(successes, n)
            bound = self._failure_bound(index, sizes) if index < len(self.battery) else None
            rows.append(ResultRow(size_index, tuple(sizes), name, n, successes, low, high, bound, elapsed, tuple(column)))
        return rows

    def run_tier(self, size_index: int, sizes: Tuple[int, ...]) -> List[ResultRow]:
        cfg = self.cfg
        self.tier_started.emit(size_index, sizes)
        start = time.perf_counter()
        job = self._job(size_index, sizes)
        outcomes: List[Tuple[bool, ...]] = []
        trial = 0
        while trial < cfg.trials:
            batch = range(trial, min(trial + cfg.batch, cfg.trials))
            outcomes.extend(self._run_batch(job, batch))
            trial = batch.stop
            if trial < cfg.trials and self._precise_enough(outcomes):
                logger.info(f"{cfg.name}: size {list(sizes)} reached the half-width target after {trial} trials")
                break
        rows = self._rows(size_index, sizes, outcomes, time.perf_counter() - start)
        battery = rows[-1]
        logger.info(
            f"{cfg.name}: size {list(sizes)} battery {battery.successes}/{battery.trials} "
            f"[{battery.ci_low:.3f}, {battery.ci_high:.3f}]"
        )
        self.tier_finished.emit(size_index, rows)
        return rows

    def run(self) -> ExperimentResult:
        cfg = self.cfg
        result = ExperimentResult(
            cfg.name, self.spec.name, cfg.measure, cfg.seed, cfg.config_hash(), include_timing=cfg.include_timing
        )
        for size_index, sizes in enumerate(cfg.sizes):
            result.rows.extend(self.run_tier(size_index, sizes))
        self.experiment_finished.emit(result)
        return result


def run_experiment(cfg: ExperimentConfig, threads: int = DEFAULT_THREADS) -> ExperimentResult:
    return ExperimentRunner(cfg, threads).run()


# -- filtrations --------------------------------------------------------------


@dataclass(frozen=True)
class FiltrationFamily:
    """A filtered class: members K_n and the labeled expansions sampled for them."""

    name: str
    member_class: str
    sampling_class: str
    params: Tuple[Tuple[str, object], ...] = ()

    def member(self, n: int) -> ClassSpec:
        return catalog(self.member_class, n=n, **dict(self.params))

    def sampling(self, n: int) -> ClassSpec:
        return catalog(self.sampling_class, n=n, **dict(self.params))


_FAMILIES = {
    "feq": ("feq-bounded", "feq-bounded-labeled"),
    "cpz": ("cpz-bounded", "cpz-bounded-labeled"),
}


def family_named(name: str, **params) -> FiltrationFamily:
    if name not in _FAMILIES:
        raise ValueError(f"Unknown filtration family {name!r}; expected one of {sorted(_FAMILIES)}")
    member, sampling = _FAMILIES[name]
    return FiltrationFamily(name, member, sampling, tuple(sorted(params.items())))


@dataclass
class FiltrationRow:
    n: int
    present: Optional[bool]
    trials: int = 0
    successes: int = 0
    ci_low: float = 0.0
    ci_high: float = 1.0

    @property
    def estimate(self) -> Optional[float]:
        return self.successes / self.trials if self.trials else None


def _presence(sentence, member: ClassSpec) -> Optional[bool]:
    """Whether the structures an axiom speaks about lie in the member class."""
    if isinstance(sentence, ExtensionAxiom):
        return member.is_member(sentence.A)[0] and member.is_member(sentence.B)[0]
    if isinstance(sentence, UniversalAxiom):
        return True
    return None


def filtration_scan(
    family: FiltrationFamily,
    sentence: Union[str, Formula, ExtensionAxiom, UniversalAxiom],
    n_values: Sequence[int],
    sizes=None,
    trials: int = 0,
    seed: int = 0,
    guard: Optional[int] = None,
) -> List[FiltrationRow]:
    """Presence of the sentence's structures in each K_n, and its mu rate in K_n'."""
    if isinstance(sentence, str):
        sentence = named_sentence(sentence)
    if trials < 0:
        raise ValueError("trials must be non-negative")
    if trials and sizes is None:
        raise ValueError("Sampling needs sizes")
    check = sentence.check if isinstance(sentence, (ExtensionAxiom, UniversalAxiom)) else (
        lambda M: evaluate(M, sentence)
    )
    rows = []
    for index, n in enumerate(n_values):
        member = family.member(n)
        if isinstance(sentence, Formula):
            check_sorts(sentence, member.signature)
        row = FiltrationRow(n, _presence(sentence, member))
        if trials:
            sampler = LevelSampler(SamplerConfig(family.sampling(n), sizes, seed=seed, guard=guard))
            for trial in range(trials):
                M = sampler.sample(trial_index=trial, seed=derive_seed(seed, index, trial)).reduct(member.signature)
                row.successes += bool(check(M))
            row.trials = trials
            row.ci_low, row.ci_high = wilson_interval(row.successes, trials)
        logger.info(f"{family.name} n={n}: present={row.present}, {row.successes}/{row.trials}")
        rows.append(row)
    return rows
