"""
Multi-sorted relational signatures.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Tuple

logger = logging.getLogger(__name__)

DEFAULT_SORT = "V"


@dataclass(frozen=True)
class RelationSymbol:
    """A relation name with its sort profile (one sort per argument place)."""

    name: str
    profile: Tuple[str, ...]

    @property
    def arity(self) -> int:
        return len(self.profile)


@dataclass(frozen=True)
class Signature:
    """Ordered sorts plus relation symbols.

    Relation order is significant: structures store their fact sets aligned
    with it.
    """

    sorts: Tuple[str, ...]
    relations: Tuple[RelationSymbol, ...]

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(self, "relations", tuple(self.relations))
        if not self.sorts:
            raise ValueError("A signature needs at least one sort")
        if len(set(self.sorts)) != len(self.sorts):
            raise ValueError(f"Duplicate sort names in {self.sorts}")
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate relation names in {names}")
        for relation in self.relations:
            if relation.arity < 1:
                raise ValueError(f"Relation {relation.name} must have positive arity")
            for sort in relation.profile:
                if sort not in self.sorts:
                    raise ValueError(f"Relation {relation.name} uses unknown sort {sort!r}")

    @classmethod
    def single_sorted(cls, arities: Dict[str, int], sort: str = DEFAULT_SORT) -> "Signature":
        """Build a one-sorted signature from ``{name: arity}``."""
        return cls(
            (sort,),
            tuple(RelationSymbol(name, (sort,) * arity) for name, arity in arities.items()),
        )

    def sort_index(self, sort: str) -> int:
        try:
            return self.sorts.index(sort)
        except ValueError:
            raise ValueError(f"Unknown sort {sort!r}; signature has {list(self.sorts)}")

    def relation_index(self, name: str) -> int:
        for index, relation in enumerate(self.relations):
            if relation.name == name:
                return index
        raise ValueError(f"Unknown relation {name!r}")

    def relation(self, name: str) -> RelationSymbol:
        return self.relations[self.relation_index(name)]

    def has_relation(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    @property
    def relation_names(self) -> Tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    def profile_indices(self, name: str) -> Tuple[int, ...]:
        """Sort positions of the argument places of ``name``."""
        return tuple(self.sort_index(s) for s in self.relation(name).profile)

    @property
    def max_arity(self) -> int:
        return max((r.arity for r in self.relations), default=0)

    def is_single_sorted(self) -> bool:
        return len(self.sorts) == 1

    def extends(self, other: "Signature") -> bool:
        """True when ``self`` has the same sorts and every relation of ``other``."""
        if self.sorts != other.sorts:
            return False
        mine = {r.name: r.profile for r in self.relations}
        return all(mine.get(r.name) == r.profile for r in other.relations)

    def restrict(self, names: Iterable[str]) -> "Signature":
        """Sub-signature keeping ``names`` (in this signature's order)."""
        keep = set(names)
        unknown = keep - set(self.relation_names)
        if unknown:
            raise ValueError(f"Cannot restrict to unknown relations {sorted(unknown)}")
        return Signature(self.sorts, tuple(r for r in self.relations if r.name in keep))

    def to_dict(self) -> dict:
        return {
            "sorts": list(self.sorts),
            "relations": [
                {"name": r.name, "arity": r.arity, "profile": list(r.profile)}
                for r in self.relations
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Signature":
        try:
            sorts = tuple(data["sorts"])
            relations = []
            for entry in data["relations"]:
                profile = tuple(entry["profile"])
                if "arity" in entry and int(entry["arity"]) != len(profile):
                    raise ValueError(
                        f"Relation {entry['name']}: arity {entry['arity']} does not match profile {profile}"
                    )
                relations.append(RelationSymbol(str(entry["name"]), profile))
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed signature: {e}")
        return cls(sorts, tuple(relations))
