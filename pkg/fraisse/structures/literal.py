"""
Text literals for structures.

    relation E V V      (optional; makes the literal self-describing)
    sort V 3
    fact E 0 1
    fact E 1 0

Lines are order-insensitive, ``#`` starts a comment. ``dumps`` writes the
canonical form (relations, sorts, then facts in signature order with sorted
tuples), so ``dumps(loads(text)) == text`` for canonical text.
"""

import logging
from typing import Dict, List, Optional

from fraisse.errors import SignatureMismatchError
from fraisse.structures.signature import RelationSymbol, Signature
from fraisse.structures.structure import FinStructure

logger = logging.getLogger(__name__)


def dumps(M: FinStructure, with_signature: bool = False) -> str:
    lines = []
    if with_signature:
        for relation in M.signature.relations:
            lines.append(" ".join(["relation", relation.name, *relation.profile]))
    for sort, size in zip(M.signature.sorts, M.sizes):
        lines.append(f"sort {sort} {size}")
    for relation, fact_set in zip(M.signature.relations, M.facts):
        for fact in sorted(fact_set):
            lines.append(" ".join(["fact", relation.name, *(str(i) for i in fact)]))
    return "\n".join(lines) + "\n"


def loads(text: str, signature: Optional[Signature] = None) -> FinStructure:
    """Parse a literal; the signature comes from the argument or from ``relation`` lines."""
    sizes: Dict[str, int] = {}
    sort_order: List[str] = []
    relations: List[RelationSymbol] = []
    facts: Dict[str, list] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        keyword = words[0]
        try:
            if keyword == "sort":
                if len(words) != 3:
                    raise ValueError("expected 'sort <name> <size>'")
                name = words[1]
                if name in sizes:
                    raise ValueError(f"sort {name} declared twice")
                sizes[name] = int(words[2])
                sort_order.append(name)
            elif keyword == "relation":
                if len(words) < 3:
                    raise ValueError("expected 'relation <name> <sort>...'")
                relations.append(RelationSymbol(words[1], tuple(words[2:])))
            elif keyword == "fact":
                if len(words) < 3:
                    raise ValueError("expected 'fact <relation> <i1> ...'")
                facts.setdefault(words[1], []).append(tuple(int(w) for w in words[2:]))
            else:
                raise ValueError(f"unknown keyword {keyword!r}")
        except ValueError as e:
            raise ValueError(f"Structure literal line {number}: {e}")

    if relations:
        described = Signature(tuple(sort_order), tuple(relations))
        if signature is not None and described != signature:
            raise SignatureMismatchError("Literal relation header disagrees with the given signature")
        signature = described
    if signature is None:
        raise ValueError("Structure literal has no relation header and no signature was given")
    unknown = set(sizes) - set(signature.sorts)
    if unknown:
        raise SignatureMismatchError(f"Literal declares unknown sorts {sorted(unknown)}")
    return FinStructure.build(signature, {s: sizes.get(s, 0) for s in signature.sorts}, facts)


def load(path, signature: Optional[Signature] = None) -> FinStructure:
    with open(path, encoding="utf-8") as handle:
        return loads(handle.read(), signature)
