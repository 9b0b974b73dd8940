"""Finite structures, embeddings, isomorphism and text literals."""

from fraisse.structures.signature import RelationSymbol, Signature
from fraisse.structures.structure import (
    FinStructure,
    SubsetEmbedding,
    induced_substructure,
    iter_embeddings,
    permute,
    qf_type_of_tuple,
    restrict_positions,
)
from fraisse.structures.isomorphism import are_isomorphic, canonical_form, count_isomorphism_types

__all__ = [
    "RelationSymbol",
    "Signature",
    "FinStructure",
    "SubsetEmbedding",
    "induced_substructure",
    "iter_embeddings",
    "permute",
    "qf_type_of_tuple",
    "restrict_positions",
    "are_isomorphic",
    "canonical_form",
    "count_isomorphism_types",
]
