"""
Tests for class specs, constraints, the catalog and the hereditary check

Tests cover:
- Violations reported by each constraint kind
- Sentence shape checks for parametric and local constraints
- Spec validation, widths and partition-class detection
- Spec files
- Catalog lookup, references and export
- Closure under substructures
"""

import pytest

from fraisse.classes.catalog import ClassCatalog, catalog, export_catalog, parse_reference, resolve_class
from fraisse.classes.constraints import Constraint, Equivalence, ForbiddenInduced, Labeling, Local, Parametric, Violation
from fraisse.classes.hereditary import check_hereditary
from fraisse.classes.spec import ClassSpec
from fraisse.errors import FormulaError, SignatureMismatchError
from fraisse.logic.parser import parse_sentence
from fraisse.structures.structure import FinStructure


def equivalence_structure(signature, n, classes):
    """E relating exactly the elements inside each class"""
    facts = [(i, j) for block in classes for i in block for j in block]
    return FinStructure.build(signature, n, {"E": facts})


class EdgeRequired(Constraint):
    """Every structure with at least two elements has an edge"""

    kind = "edge-required"

    def check(self, M):
        if M.size >= 2 and not M.facts[0]:
            return Violation(self.describe(), tuple(M.elements()))
        return None

    def width(self):
        return 2


class TestConstraints:
    def test_forbidden_induced(self, graph_signature, triangle, path3):
        constraint = ForbiddenInduced(triangle, "K3")
        assert constraint.check(path3) is None
        violation = constraint.check(triangle)
        assert sorted(violation.witness) == [(0, 0), (0, 1), (0, 2)]
        assert "K3" in str(violation)
        assert constraint.width() == 3

    def test_parametric_violation_witness(self, graph_signature):
        symmetric = Parametric(
            parse_sentence("(forall ((x V) (y V)) (implies (not (= x y)) (iff (E x y) (E y x))))", graph_signature)
        )
        M = FinStructure.build(graph_signature, 3, {"E": [(1, 2)]})
        violation = symmetric.check(M)
        assert set(violation.witness) == {(0, 1), (0, 2)}
        assert symmetric.width() == 2

    def test_parametric_shape(self, graph_signature):
        with pytest.raises(FormulaError, match="every quantified variable"):
            Parametric(parse_sentence("(forall ((x V) (y V)) (E x x))", graph_signature))
        with pytest.raises(FormulaError, match="equalities"):
            Parametric(parse_sentence("(forall ((x V) (y V)) (or (= x y) (E x y)))", graph_signature))
        with pytest.raises(FormulaError, match="universal prefix"):
            Parametric(parse_sentence("(exists (x V) (E x x))", graph_signature))

    def test_local_shape(self, graph_signature):
        Local(parse_sentence("(forall ((x V) (y V)) (implies (E x y) (E y x)))", graph_signature))
        with pytest.raises(FormulaError, match="R\\(x...\\) -> psi"):
            Local(parse_sentence("(forall ((x V) (y V)) (E x y))", graph_signature))
        with pytest.raises(FormulaError, match="guard atom"):
            Local(parse_sentence("(forall ((x V) (y V)) (implies (E x x) (E y y)))", graph_signature))
        with pytest.raises(FormulaError, match="quantifier-free"):
            Local(parse_sentence("(forall (x V) (implies (E x x) (exists (y V) (E x y))))", graph_signature))

    def test_block_check_only_for_block_local_sentences(self, graph_signature):
        local = Local(parse_sentence("(forall ((x V) (y V)) (implies (E x y) (not (= x y))))", graph_signature))
        loop = FinStructure.build(graph_signature, 1, {"E": [(0, 0)]})
        # x = y = 0 covers the one-element block
        assert not local.check_block(loop)

    @pytest.mark.parametrize("facts, detail", [
        ([(0, 0), (1, 1)], "not reflexive"),
        ([(0, 0), (1, 1), (2, 2), (0, 1)], "not symmetric"),
        ([(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1)], "not transitive"),
    ])
    def test_equivalence_axioms(self, graph_signature, facts, detail):
        M = FinStructure.build(graph_signature, 3, {"E": facts})
        assert Equivalence("E").check(M).detail == detail

    def test_equivalence_class_bound(self, graph_signature):
        M = equivalence_structure(graph_signature, 3, [[0], [1], [2]])
        assert Equivalence("E").check(M) is None
        violation = Equivalence("E", max_classes=2).check(M)
        assert violation.detail == "more than 2 classes"
        assert len(violation.witness) == 3
        assert Equivalence("E", max_classes=3).check(M) is None

    def test_equivalence_parameters(self):
        spec = catalog("feq")
        # parameter 0 relates both objects, parameter 1 separates them
        facts = [(0, i, j) for i in range(2) for j in range(2)] + [(1, 0, 0), (1, 1, 1)]
        M = FinStructure.build(spec.signature, (2, 2), {"E": facts})
        assert spec.is_member(M) == (True, None)
        broken = FinStructure.build(spec.signature, (2, 2), {"E": facts[:-1]})
        member, violation = spec.is_member(broken)
        assert not member
        assert (0, 1) in violation.witness

    def test_equivalence_validation(self, graph_signature):
        with pytest.raises(ValueError):
            Equivalence("E", k=0)
        with pytest.raises(ValueError):
            Equivalence("E", max_classes=0)
        with pytest.raises(SignatureMismatchError, match="profile"):
            Equivalence("E", k=2).validate(graph_signature)
        with pytest.raises(SignatureMismatchError, match="not in signature"):
            Equivalence("F").validate(graph_signature)

    def test_redundant_class(self):
        spec = catalog("cpz", m=2)
        signature = spec.signature
        redundant = [(0, 0), (1, 1)]
        e1 = [(0, 0), (1, 1)]
        e2 = [t + u for t in redundant for u in redundant] + [t + t for t in [(0, 1), (1, 0)]]
        M = FinStructure.build(signature, 2, {"E1": e1, "E2": e2})
        assert spec.is_member(M) == (True, None)
        # putting (0, 0) alone breaks the single redundant class
        e2_split = [f for f in e2 if f not in [(0, 0, 1, 1), (1, 1, 0, 0)]]
        member, violation = spec.is_member(FinStructure.build(signature, 2, {"E1": e1, "E2": e2_split}))
        assert not member
        assert "redundant" in violation.detail

    def test_labeling(self):
        spec = catalog("named-classes", k=2)
        signature = spec.signature
        same_class = [(0, 0), (0, 1), (1, 0), (1, 1)]
        good = FinStructure.build(signature, 2, {"E": same_class, "C1": [(0,), (1,)]})
        assert spec.is_member(good) == (True, None)
        split_labels = FinStructure.build(signature, 2, {"E": same_class, "C1": [(0,)], "C2": [(1,)]})
        assert "disagrees" in spec.is_member(split_labels)[1].detail
        unlabeled = FinStructure.build(signature, 2, {"E": same_class, "C1": [(0,)]})
        assert spec.is_member(unlabeled)[1].detail == "0 labels hold"

    def test_labeling_validation(self):
        with pytest.raises(ValueError, match="at least one label"):
            Labeling(Equivalence("E"), ())
        with pytest.raises(ValueError, match="Reserved label"):
            Labeling(Equivalence("E"), ("C1",), "C0")


class TestClassSpec:
    def test_membership_needs_matching_signature(self, graphs):
        other = catalog("two-graph")
        with pytest.raises(SignatureMismatchError):
            graphs.is_member(FinStructure.empty(other.signature, 2))

    def test_invalid_constraint_rejected(self, graph_signature):
        with pytest.raises(SignatureMismatchError):
            ClassSpec("bad", graph_signature, (Equivalence("F"),))

    @pytest.mark.parametrize("reference, width", [
        ("graphs", 2),
        ("triangle-free", 3),
        ("equivalence", 3),
        ("feq-bounded:n=2", 4),
        ("feq-bounded-labeled:n=2", 4),
        ("cpz:m=2", 6),
    ])
    def test_width(self, reference, width):
        assert resolve_class(reference).width() == width

    @pytest.mark.parametrize("reference, expected", [
        ("graphs", False),
        ("triangle-free", False),
        ("equivalence", True),
        ("named-classes", True),
        ("feq-bounded-labeled", True),
        ("cpz-bounded-labeled", True),
    ])
    def test_partition_class(self, reference, expected):
        assert resolve_class(reference).is_partition_class() is expected

    def test_equivalence_with_extra_constraint_is_not_partition_class(self, graph_signature, triangle):
        spec = ClassSpec("eq-no-triangle", graph_signature, (Equivalence("E"), ForbiddenInduced(triangle)))
        assert not spec.is_partition_class()

    @pytest.mark.parametrize("name", ClassCatalog.names())
    def test_spec_file(self, tmp_path, name):
        spec = catalog(name)
        path = tmp_path / f"{name}.json"
        spec.save(path)
        loaded = ClassSpec.load(path)
        assert loaded == spec
        assert loaded.name == spec.name
        assert loaded.certified_amalgamation == spec.certified_amalgamation

    def test_spec_file_errors(self, graphs):
        data = graphs.to_dict()
        with pytest.raises(ValueError, match="schema"):
            ClassSpec.from_dict({**data, "schema": 99})
        with pytest.raises(ValueError, match="Malformed"):
            ClassSpec.from_dict({"name": "x"})
        with pytest.raises(ValueError, match="not valid JSON"):
            ClassSpec.loads("{")
        labeled = catalog("named-classes").to_dict()
        labeled["constraints"] = [c for c in labeled["constraints"] if c["kind"] != "equivalence"]
        with pytest.raises(ValueError, match="no equivalence constraint"):
            ClassSpec.from_dict(labeled)

    def test_fingerprint_tracks_content(self):
        assert catalog("knk", n=4, k=2).fingerprint() == catalog("knk", n=4, k=2).fingerprint()
        assert catalog("knk", n=4, k=2).fingerprint() != catalog("knk", n=5, k=2).fingerprint()


class TestCatalog:
    def test_names(self):
        assert {"graphs", "triangle-free", "knk", "two-graph", "feq", "cpz-bounded-labeled"} <= set(ClassCatalog.names())

    def test_knk_naming(self):
        assert catalog("knk").name == "triangle-free"
        assert catalog("knk", n=4, k=2).name == "knk(n=4,k=2)"
        assert catalog("knk", n=3, k=2) == catalog("triangle-free")

    def test_parameter_errors(self):
        with pytest.raises(ValueError, match="Unknown class"):
            catalog("lattices")
        with pytest.raises(ValueError, match="takes parameters"):
            catalog("graphs", n=3)
        with pytest.raises(ValueError, match="n >= k"):
            catalog("knk", n=2, k=3)
        with pytest.raises(ValueError, match="integer >= 1"):
            catalog("feq-bounded", n=0)
        with pytest.raises(ValueError, match="integer >= 1"):
            catalog("cpz", m=True)

    def test_parse_reference(self):
        assert parse_reference("knk:n=4,k=2") == ("knk", {"n": 4, "k": 2})
        assert parse_reference("equivalence:n=none") == ("equivalence", {"n": None})
        assert parse_reference(" graphs ") == ("graphs", {})
        with pytest.raises(ValueError, match="key=value"):
            parse_reference("knk:4")
        with pytest.raises(ValueError, match="Empty"):
            parse_reference(":n=1")

    def test_resolve_file(self, tmp_path, triangle_free):
        path = tmp_path / "custom.json"
        triangle_free.save(path)
        assert resolve_class(str(path)) == triangle_free

    def test_register(self, monkeypatch, graphs):
        monkeypatch.setitem(ClassCatalog.ENTRIES, "my-graphs", {
            "builder": lambda: graphs, "defaults": {}, "description": "",
        })
        assert catalog("my-graphs") is graphs

    def test_register_classmethod(self, monkeypatch):
        monkeypatch.setattr(ClassCatalog, "ENTRIES", dict(ClassCatalog.ENTRIES))
        ClassCatalog.register("tf", lambda: catalog("triangle-free"), description="alias")
        assert ClassCatalog.get_entry_info("tf")["description"] == "alias"
        assert resolve_class("tf").name == "triangle-free"

    def test_describe(self):
        rows = {row["name"]: row for row in ClassCatalog.describe()}
        assert rows["graphs"]["certified"]
        assert not rows["triangle-free"]["certified"]
        assert rows["knk"]["parameters"] == {"n": 3, "k": 2}

    def test_export(self, tmp_path):
        paths = export_catalog(str(tmp_path / "classes"))
        assert len(paths) == len(ClassCatalog.names())
        assert ClassSpec.load(paths[0]) == catalog(ClassCatalog.names()[0])


class TestHereditary:
    @pytest.mark.parametrize("reference", ["graphs", "triangle-free", "two-graph", "named-classes"])
    def test_catalog_classes_are_hereditary(self, reference):
        assert check_hereditary(resolve_class(reference), 3) == (True, None)

    def test_non_universal_constraint_is_caught(self, graphs):
        spec = ClassSpec("connected-ish", graphs.signature, graphs.constraints + (EdgeRequired(),))
        hereditary, counterexample = check_hereditary(spec, 3)
        assert not hereditary
        M, sub = counterexample
        assert M.size == 3 and sub.size == 2
        assert spec.is_member(M)[0]
        assert not spec.is_member(sub)[0]

    def test_negative_bound(self, graphs):
        with pytest.raises(ValueError, match="non-negative"):
            check_hereditary(graphs, -1)
