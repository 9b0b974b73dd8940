"""
Tests for signatures and finite structures

Tests cover:
- Signature validation and sub-signatures
- Building structures and rejecting malformed facts
- Flat (sort-major) positions and induced substructures
- Permutations, reducts and embeddings
"""

import pytest

from fraisse.errors import SignatureMismatchError
from fraisse.structures.signature import RelationSymbol, Signature
from fraisse.structures.structure import (
    FinStructure,
    SubsetEmbedding,
    full_support_facts,
    induced_substructure,
    iter_embeddings,
    normalize_sizes,
    permute,
    qf_type_of_tuple,
    restrict_positions,
)


@pytest.fixture
def two_sorted():
    """Parameters P and objects O with E on (P, O, O)"""
    return Signature(("P", "O"), (RelationSymbol("E", ("P", "O", "O")), RelationSymbol("C", ("P", "O"))))


class TestSignature:
    def test_single_sorted(self):
        signature = Signature.single_sorted({"E": 2, "T": 3})
        assert signature.sorts == ("V",)
        assert signature.relation_names == ("E", "T")
        assert signature.relation("T").arity == 3
        assert signature.max_arity == 3
        assert signature.is_single_sorted()

    def test_rejects_unknown_sort(self):
        with pytest.raises(ValueError, match="unknown sort"):
            Signature(("V",), (RelationSymbol("E", ("V", "W")),))

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="Duplicate relation"):
            Signature(("V",), (RelationSymbol("E", ("V",)), RelationSymbol("E", ("V", "V"))))
        with pytest.raises(ValueError, match="Duplicate sort"):
            Signature(("V", "V"), ())

    def test_rejects_nullary_relation(self):
        with pytest.raises(ValueError, match="positive arity"):
            Signature(("V",), (RelationSymbol("Z", ()),))

    def test_extends_and_restrict(self, two_sorted):
        smaller = two_sorted.restrict(["E"])
        assert two_sorted.extends(smaller)
        assert not smaller.extends(two_sorted)
        assert smaller.relation_names == ("E",)
        with pytest.raises(ValueError):
            two_sorted.restrict(["missing"])

    def test_profile_indices(self, two_sorted):
        assert two_sorted.profile_indices("E") == (0, 1, 1)
        assert two_sorted.profile_indices("C") == (0, 1)

    def test_dict_form(self, two_sorted):
        assert Signature.from_dict(two_sorted.to_dict()) == two_sorted

    def test_dict_form_checks_arity(self):
        data = {"sorts": ["V"], "relations": [{"name": "E", "arity": 3, "profile": ["V", "V"]}]}
        with pytest.raises(ValueError, match="arity"):
            Signature.from_dict(data)


class TestFinStructure:
    def test_build_and_query(self, path3):
        assert path3.size == 3
        assert path3.holds("E", (0, 1))
        assert not path3.holds("E", (0, 2))
        assert path3.num_facts == 4

    def test_sizes_forms(self, two_sorted):
        assert normalize_sizes(two_sorted, {"O": 3}) == (0, 3)
        assert normalize_sizes(two_sorted, [1, 2]) == (1, 2)
        with pytest.raises(ValueError, match="single-sorted"):
            normalize_sizes(two_sorted, 3)
        with pytest.raises(ValueError, match="non-negative"):
            normalize_sizes(two_sorted, [1, -1])

    def test_rejects_out_of_range_fact(self, graph_signature):
        with pytest.raises(ValueError, match="out of range"):
            FinStructure.build(graph_signature, 2, {"E": [(0, 2)]})

    def test_rejects_wrong_arity(self, graph_signature):
        with pytest.raises(ValueError, match="wrong arity"):
            FinStructure.build(graph_signature, 2, {"E": [(0,)]})

    def test_rejects_unknown_relation(self, graph_signature):
        with pytest.raises(ValueError, match="Unknown relations"):
            FinStructure.build(graph_signature, 2, {"F": [(0, 1)]})

    def test_immutable(self, path3):
        with pytest.raises(AttributeError):
            path3.sizes = (4,)

    def test_equality_is_extensional(self, graph_signature, path3):
        again = FinStructure.build(graph_signature, 3, {"E": [(2, 1), (1, 2), (1, 0), (0, 1)]})
        assert again == path3
        assert hash(again) == hash(path3)
        assert len({again, path3}) == 1

    def test_flat_order_is_sort_major(self, two_sorted):
        M = FinStructure.empty(two_sorted, (2, 3))
        assert M.elements() == [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2)]
        assert M.offsets == (0, 2)
        assert M.element_at(3) == (1, 1)
        assert M.position_of((1, 2)) == 4

    def test_reduct(self, two_sorted):
        M = FinStructure.build(two_sorted, (1, 2), {"E": [(0, 0, 1)], "C": [(0, 1)]})
        smaller = two_sorted.restrict(["E"])
        R = M.reduct(smaller)
        assert R.signature == smaller
        assert R.fact_set("E") == frozenset({(0, 0, 1)})
        with pytest.raises(SignatureMismatchError):
            R.reduct(two_sorted)


class TestSubstructures:
    def test_restrict_positions_renumbers(self, path3):
        sub = restrict_positions(path3, [1, 2])
        assert sub.sizes == (2,)
        assert sub.fact_set("E") == frozenset({(0, 1), (1, 0)})

    def test_restrict_positions_out_of_range(self, path3):
        with pytest.raises(ValueError, match="out of range"):
            restrict_positions(path3, [0, 3])

    def test_induced_substructure_forms(self, two_sorted):
        M = FinStructure.build(two_sorted, (2, 3), {"E": [(1, 0, 2), (0, 1, 2)], "C": [(1, 2)]})
        sub = induced_substructure(M, {"P": [1], "O": [0, 2]})
        assert sub.sizes == (1, 2)
        assert sub.fact_set("E") == frozenset({(0, 0, 1)})
        assert sub.fact_set("C") == frozenset({(0, 1)})
        assert induced_substructure(M, [[1], [0, 2]]) == sub

    def test_qf_type_of_tuple_follows_tuple_order(self, path3):
        T = qf_type_of_tuple(path3, [2, 1])
        # element 2 becomes 0 and element 1 becomes 1
        assert T.fact_set("E") == frozenset({(0, 1), (1, 0)})
        T = qf_type_of_tuple(path3, [0, 2])
        assert T.num_facts == 0

    def test_qf_type_rejects_repeats(self, path3):
        with pytest.raises(ValueError, match="repeated"):
            qf_type_of_tuple(path3, [1, 1])

    def test_permute(self, path3):
        moved = permute(path3, [[1, 0, 2]])
        assert moved.holds("E", (1, 0)) and moved.holds("E", (0, 2))
        assert not moved.holds("E", (1, 2))
        with pytest.raises(ValueError, match="Not a permutation"):
            permute(path3, [[0, 0, 1]])

    def test_full_support_facts(self, graph_signature):
        M = FinStructure.build(graph_signature, 2, {"E": [(0, 1), (1, 1)]})
        assert full_support_facts(M) == [(0, (0, 1))]


class TestEmbeddings:
    def test_edges_embed_into_path(self, graph_signature, path3):
        edge = FinStructure.build(graph_signature, 2, {"E": [(0, 1), (1, 0)]})
        embeddings = list(iter_embeddings(edge, path3))
        # two edges, two orientations each
        assert len(embeddings) == 4
        assert all(e.is_embedding_of(edge) for e in embeddings)

    def test_non_edges_embed_once_per_ordering(self, graph_signature, path3):
        non_edge = FinStructure.empty(graph_signature, 2)
        assert sorted(e.mapping for e in iter_embeddings(non_edge, path3)) == [((0, 2),), ((2, 0),)]

    def test_larger_source_has_no_embeddings(self, graph_signature, path3):
        assert list(iter_embeddings(FinStructure.empty(graph_signature, 4), path3)) == []

    def test_embedding_validation(self, path3):
        with pytest.raises(ValueError, match="injective"):
            SubsetEmbedding((2,), path3, ((1, 1),))
        with pytest.raises(ValueError, match="leaves"):
            SubsetEmbedding((1,), path3, ((5,),))

    def test_pullback(self, path3):
        embedding = SubsetEmbedding((2,), path3, ((2, 1),))
        assert embedding.image() == [(0, 2), (0, 1)]
        assert embedding.pullback().num_facts == 2
