"""
Isomorphism testing and canonical forms at desk scale.
"""

import logging
from itertools import permutations, product
from typing import Dict, Iterable, Optional, Tuple

from fraisse.constants import DEFAULT_ISOMORPHISM_GUARD
from fraisse.errors import GuardExceededError
from fraisse.structures.structure import (
    Element,
    FinStructure,
    check_same_signature,
    iter_embeddings,
    permute,
)

logger = logging.getLogger(__name__)


def _check_guard(M: FinStructure, guard: int):
    largest = max(M.sizes, default=0)
    if largest > guard:
        raise GuardExceededError("elements per sort", largest, guard)


def are_isomorphic(
    M1: FinStructure, M2: FinStructure, guard: int = DEFAULT_ISOMORPHISM_GUARD
) -> Tuple[bool, Optional[Dict[Element, Element]]]:
    """Decide isomorphism; returns ``(True, witness)`` or ``(False, None)``.

    The witness maps each element of M1 to its image in M2.
    """
    check_same_signature(M1.signature, M2.signature, "isomorphism")
    if M1.sizes != M2.sizes or [len(f) for f in M1.facts] != [len(f) for f in M2.facts]:
        return False, None
    _check_guard(M1, guard)
    for embedding in iter_embeddings(M1, M2):
        witness = {}
        for s, indices in enumerate(embedding.mapping):
            for i, j in enumerate(indices):
                witness[(s, i)] = (s, j)
        return True, witness
    return False, None


def canonical_form(M: FinStructure, guard: int = DEFAULT_ISOMORPHISM_GUARD) -> tuple:
    """Least labeled encoding over all sort-preserving relabelings."""
    _check_guard(M, guard)
    best = None
    for perms in product(*(permutations(range(n)) for n in M.sizes)):
        encoding = permute(M, perms).encoding()
        if best is None or encoding < best:
            best = encoding
    return best


def count_isomorphism_types(structures: Iterable[FinStructure], guard: int = DEFAULT_ISOMORPHISM_GUARD) -> int:
    """Number of isomorphism classes among ``structures``."""
    return len({canonical_form(M, guard) for M in structures})
