"""
Experiment configuration and its JSON file format.

    {
      "name": "graphs-extension",
      "class": "graphs",
      "measure": "mu",
      "sizes": [16, 32, 64],
      "battery": {"axioms": {"bound": 3, "universal": false}, "sentences": ["feq-intersect", "(forall ...)"]},
      "trials": 200,
      "seed": 1,
      "half_width_target": 0.0
    }

``sizes`` lists domain sizes (an integer for one-sorted classes, one
integer per sort otherwise). Instead of ``sizes`` a ``schedule`` gives the
sizes as terms in n, e.g. ``{"n": [5, 10, 20], "sizes": [2, "n"]}``; a
term is an integer or ``a*n+b`` with optional parts. ``family`` selects a
filtered class instead of ``class``: ``{"name": "feq", "n": 3}`` samples
the labeled expansion K_n' and evaluates sentences on its reduct.
"""

import hashlib
import json
import logging
import re
from dataclasses import asdict, dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

from fraisse.constants import (
    APP_VERSION,
    DEFAULT_HALF_WIDTH_TARGET,
    DEFAULT_TRIAL_BATCH,
    FORMAT_CSV,
    MEASURE_MU,
    MEASURES,
    MODE_BOUNDED,
    MODE_UNBOUNDED,
    OUTPUT_FORMATS,
)

logger = logging.getLogger(__name__)

_TERM = re.compile(r"^\s*(?:(\d+)\s*\*\s*)?(n)?\s*(?:\+\s*(\d+))?\s*$")


def size_term(term, n: int) -> int:
    """Evaluate an integer or an ``a*n+b`` term at n."""
    if isinstance(term, int) and not isinstance(term, bool):
        return term
    if str(term).strip().isdigit():
        return int(str(term).strip())
    match = _TERM.match(str(term))
    if not match or not any(match.groups()):
        raise ValueError(f"Size term {term!r} is not an integer or a*n+b")
    factor, variable, offset = match.groups()
    if variable is None:
        raise ValueError(f"Size term {term!r} is not an integer or a*n+b")
    return int(factor or 1) * n + int(offset or 0)


def expand_schedule(schedule: dict) -> List[Tuple[int, ...]]:
    try:
        ns, terms = schedule["n"], schedule["sizes"]
    except (KeyError, TypeError) as e:
        raise ValueError(f"A schedule needs 'n' and 'sizes': {e}")
    if not isinstance(terms, list):
        terms = [terms]
    return [tuple(size_term(term, int(n)) for term in terms) for n in ns]


def _as_sizes(entry) -> Tuple[int, ...]:
    if isinstance(entry, int) and not isinstance(entry, bool):
        return (entry,)
    if isinstance(entry, (list, tuple)) and entry and all(isinstance(x, int) for x in entry):
        return tuple(entry)
    raise ValueError(f"Invalid size {entry!r}: expected an integer or a list of integers")


@dataclass(frozen=True)
class AxiomBattery:
    """Axioms generated for the class, up to ``bound`` elements."""

    bound: int
    universal: bool = True
    extension: bool = True
    mode: str = "full"
    n: Optional[int] = None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    class_ref: Optional[str] = None
    family: Optional[str] = None
    family_n: Optional[int] = None
    measure: str = MEASURE_MU
    mode: str = MODE_UNBOUNDED
    bound: Optional[int] = None
    sizes: Tuple[Tuple[int, ...], ...] = ()
    axioms: Optional[AxiomBattery] = None
    sentences: Tuple[str, ...] = ()
    trials: int = 100
    seed: int = 0
    half_width_target: float = DEFAULT_HALF_WIDTH_TARGET
    batch: int = DEFAULT_TRIAL_BATCH
    verify: bool = False
    guard: Optional[int] = None
    out: Optional[str] = None
    format: str = FORMAT_CSV
    include_timing: bool = False
    family_params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(_as_sizes(s) for s in self.sizes))
        object.__setattr__(self, "sentences", tuple(self.sentences))
        self.validate()

    def validate(self):
        """Checks that need no class; the runner checks the sentences' sorts."""
        if (self.class_ref is None) == (self.family is None):
            raise ValueError("An experiment needs exactly one of 'class' and 'family'")
        if self.family is not None and (self.family_n is None or self.family_n < 1):
            raise ValueError("A family experiment needs a positive 'n'")
        if self.measure not in MEASURES:
            raise ValueError(f"Unknown measure {self.measure!r}; expected one of {MEASURES}")
        if self.mode not in (MODE_UNBOUNDED, MODE_BOUNDED):
            raise ValueError(f"Unknown mu mode {self.mode!r}")
        if self.mode == MODE_BOUNDED and (self.bound is None or self.bound < 1):
            raise ValueError("Bounded mode needs a positive bound")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if self.batch < 1:
            raise ValueError(f"batch must be at least 1, got {self.batch}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if not 0.0 <= self.half_width_target < 0.5:
            raise ValueError(f"half_width_target must be in [0, 0.5), got {self.half_width_target}")
        if not self.sizes:
            raise ValueError("An experiment needs at least one size")
        totals = [sum(s) for s in self.sizes]
        if any(b <= a for a, b in zip(totals, totals[1:])):
            raise ValueError(f"sizes must be strictly increasing, got {[list(s) for s in self.sizes]}")
        if self.axioms is None and not self.sentences:
            raise ValueError("The sentence battery is empty")
        if self.format not in OUTPUT_FORMATS:
            raise ValueError(f"Unknown format {self.format!r}; expected one of {OUTPUT_FORMATS}")

    def with_overrides(
        self,
        seed: Optional[int] = None,
        trials: Optional[int] = None,
        sizes: Optional[Sequence] = None,
        out: Optional[str] = None,
        format: Optional[str] = None,
    ) -> "ExperimentConfig":
        changes = {}
        if seed is not None:
            changes["seed"] = seed
        if trials is not None:
            changes["trials"] = trials
        if sizes is not None:
            changes["sizes"] = tuple(_as_sizes(s) for s in sizes)
        if out is not None:
            changes["out"] = out
        if format is not None:
            changes["format"] = format
        return replace(self, **changes) if changes else self

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "measure": self.measure,
            "mode": self.mode,
            "bound": self.bound,
            "sizes": [list(s) for s in self.sizes],
            "battery": {
                "axioms": asdict(self.axioms) if self.axioms is not None else None,
                "sentences": list(self.sentences),
            },
            "trials": self.trials,
            "seed": self.seed,
            "half_width_target": self.half_width_target,
            "batch": self.batch,
            "verify": self.verify,
            "guard": self.guard,
        }
        if self.class_ref is not None:
            data["class"] = self.class_ref
        else:
            data["family"] = {"name": self.family, "n": self.family_n, **self.family_params}
        return data

    def config_hash(self) -> str:
        """Hash of everything that determines the results (not the output path or format)."""
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(f"{APP_VERSION}:{payload}".encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            if "sizes" in data and "schedule" in data:
                raise ValueError("Give either 'sizes' or 'schedule', not both")
            sizes = expand_schedule(data["schedule"]) if "schedule" in data else data.get("sizes", [])
            battery = data.get("battery", {})
            axioms = battery.get("axioms")
            family = data.get("family")
            family_params = {}
            if family is not None:
                family = dict(family)
                family_name, family_n = family.pop("name"), family.pop("n", None)
                family_params = family
            else:
                family_name = family_n = None
            return cls(
                name=str(data.get("name", "experiment")),
                class_ref=data.get("class"),
                family=family_name,
                family_n=family_n,
                family_params=family_params,
                measure=data.get("measure", MEASURE_MU),
                mode=data.get("mode", MODE_UNBOUNDED),
                bound=data.get("bound"),
                sizes=tuple(sizes),
                axioms=AxiomBattery(**axioms) if axioms else None,
                sentences=tuple(battery.get("sentences", ())),
                trials=int(data.get("trials", 100)),
                seed=int(data.get("seed", 0)),
                half_width_target=float(data.get("half_width_target", DEFAULT_HALF_WIDTH_TARGET)),
                batch=int(data.get("batch", DEFAULT_TRIAL_BATCH)),
                verify=bool(data.get("verify", False)),
                guard=data.get("guard"),
                out=data.get("out"),
                format=data.get("format", FORMAT_CSV),
                include_timing=bool(data.get("include_timing", False)),
            )
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed experiment config: {e}")


def load_config(path, defaults: Optional[dict] = None) -> ExperimentConfig:
    """Read an experiment file; ``defaults`` supplies keys the file leaves out."""
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as e:
        raise ValueError(f"Experiment config {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ValueError(f"Experiment config {path} must be a JSON object")
    if defaults:
        data = {**defaults, **data}
    config = ExperimentConfig.from_dict(data)
    logger.info(f"Loaded experiment {config.name} from {path}")
    return config
