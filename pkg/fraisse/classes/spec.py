"""
Declarative class specifications and their JSON file format.

    {
      "schema": 1,
      "name": "triangle-free",
      "signature": {"sorts": ["V"], "relations": [{"name": "E", "arity": 2, "profile": ["V", "V"]}]},
      "constraints": [{"kind": "parametric", "sentence": "(forall (x V) (not (E x x)))"}, ...],
      "filtration_n": null,
      "certified_amalgamation": false
    }
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from fraisse.classes.constraints import (
    Constraint,
    Equivalence,
    Labeling,
    Violation,
    constraint_from_dict,
)
from fraisse.constants import SPEC_SCHEMA_VERSION
from fraisse.errors import SignatureMismatchError
from fraisse.structures.signature import Signature
from fraisse.structures.structure import FinStructure

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClassSpec:
    """A class of finite structures given as a conjunction of constraints.

    ``certified_amalgamation`` asserts basic disjoint k-amalgamation for
    every k (a theorem for the catalog classes that set it); samplers then
    skip their own certification.
    """

    name: str
    signature: Signature
    constraints: Tuple[Constraint, ...]
    filtration_n: Optional[int] = None
    certified_amalgamation: bool = False
    _fingerprint: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if self.filtration_n is not None and self.filtration_n < 1:
            raise ValueError(f"filtration_n must be positive, got {self.filtration_n}")
        for constraint in self.constraints:
            constraint.validate(self.signature)

    def __eq__(self, other):
        if not isinstance(other, ClassSpec):
            return NotImplemented
        return self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())

    def is_member(self, M: FinStructure) -> Tuple[bool, Optional[Violation]]:
        """``(True, None)`` or ``(False, first violation)``."""
        if M.signature != self.signature:
            raise SignatureMismatchError(f"Structure is not over the signature of {self.name}")
        for constraint in self.constraints:
            violation = constraint.check(M)
            if violation is not None:
                logger.debug(f"{self.name}: {violation}")
                return False, violation
        return True, None

    def width(self) -> int:
        """Largest number of elements a violation can involve."""
        return max([self.signature.max_arity] + [c.width() for c in self.constraints])

    @property
    def max_arity(self) -> int:
        return self.signature.max_arity

    def equivalences(self) -> List[Equivalence]:
        return [c for c in self.constraints if isinstance(c, Equivalence)]

    def labelings(self) -> List[Labeling]:
        return [c for c in self.constraints if isinstance(c, Labeling)]

    def is_partition_class(self) -> bool:
        """Every relation is an equivalence relation or one of its labels, and nothing else constrains it."""
        if not self.equivalences():
            return False
        if any(not isinstance(c, (Equivalence, Labeling)) for c in self.constraints):
            return False
        governed = {e.relation for e in self.equivalences()}
        for labeling in self.labelings():
            governed |= set(labeling.labels)
        if governed != set(self.signature.relation_names):
            return False
        # each equivalence relation has one constraint and at most one labeling
        relations = [e.relation for e in self.equivalences()]
        labeled = [lab.equivalence.relation for lab in self.labelings()]
        return len(set(relations)) == len(relations) and len(set(labeled)) == len(labeled)

    def labeling_for(self, relation: str) -> Optional[Labeling]:
        for labeling in self.labelings():
            if labeling.equivalence.relation == relation:
                return labeling
        return None

    # -- files ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": SPEC_SCHEMA_VERSION,
            "name": self.name,
            "signature": self.signature.to_dict(),
            "constraints": [c.to_dict() for c in self.constraints],
            "filtration_n": self.filtration_n,
            "certified_amalgamation": self.certified_amalgamation,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def fingerprint(self) -> str:
        """Stable hash of the file form; keys level caches."""
        if not self._fingerprint:
            try:
                payload = json.dumps(self.to_dict(), sort_keys=True)
            except ValueError:
                payload = f"{self.name}:{id(self)}"
            self._fingerprint.append(hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16])
        return self._fingerprint[0]

    @classmethod
    def from_dict(cls, data: dict) -> "ClassSpec":
        try:
            schema = data.get("schema", SPEC_SCHEMA_VERSION)
            if schema != SPEC_SCHEMA_VERSION:
                raise ValueError(f"Unsupported spec schema {schema}")
            signature = Signature.from_dict(data["signature"])
            constraints = []
            equivalences: Dict[str, Equivalence] = {}
            entries = data.get("constraints", [])
            # equivalences first so labelings can refer to them
            for entry in entries:
                if entry.get("kind") == Equivalence.kind:
                    equivalence = constraint_from_dict(entry, signature, equivalences)
                    equivalences[equivalence.relation] = equivalence
            for entry in entries:
                if entry.get("kind") == Equivalence.kind:
                    constraints.append(equivalences[entry["relation"]])
                else:
                    constraints.append(constraint_from_dict(entry, signature, equivalences))
            return cls(
                name=str(data.get("name", "unnamed")),
                signature=signature,
                constraints=tuple(constraints),
                filtration_n=data.get("filtration_n"),
                certified_amalgamation=bool(data.get("certified_amalgamation", False)),
            )
        except (KeyError, TypeError, AttributeError) as e:
            raise ValueError(f"Malformed class spec: {e}")

    @classmethod
    def loads(cls, text: str) -> "ClassSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValueError(f"Class spec is not valid JSON: {e}")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ClassSpec":
        with open(path, encoding="utf-8") as handle:
            return cls.loads(handle.read())

    def save(self, path):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.dumps())
        logger.info(f"Wrote class spec {self.name} to {path}")
