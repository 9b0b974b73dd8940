"""
Catalog of built-in classes.

Every entry is a builder taking keyword parameters. The CLI and experiment
configs refer to entries by reference strings such as ``knk:n=4,k=2``; a
path to a JSON spec file is accepted wherever a reference is.
"""

import logging
import os
from itertools import combinations, permutations
from typing import Callable, Dict, List, Optional, Tuple

from fraisse.classes.constraints import Equivalence, ForbiddenInduced, Labeling, Local, Parametric
from fraisse.classes.spec import ClassSpec
from fraisse.logic.parser import parse_sentence
from fraisse.structures.signature import RelationSymbol, Signature
from fraisse.structures.structure import FinStructure

logger = logging.getLogger(__name__)


def _name(base: str, **params) -> str:
    shown = [f"{key}={value}" for key, value in params.items() if value is not None]
    return f"{base}({','.join(shown)})" if shown else base


def _positive(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValueError(f"Parameter {name} must be an integer >= {minimum}, got {value!r}")
    return value


def _variables(k: int) -> List[str]:
    return [f"x{i + 1}" for i in range(k)]


def hypergraph_sentence(relation: str, k: int, sort: str = "V") -> str:
    """``E(x1..xk) -> distinct(x) and E`` closed under adjacent transpositions."""
    xs = _variables(k)
    binders = " ".join(f"({x} {sort})" for x in xs)
    parts = [f"(not (= {x} {y}))" for x, y in combinations(xs, 2)]
    for i in range(k - 1):
        swapped = xs[:i] + [xs[i + 1], xs[i]] + xs[i + 2:]
        parts.append(f"({relation} {' '.join(swapped)})")
    return f"(forall ({binders}) (implies ({relation} {' '.join(xs)}) (and {' '.join(parts)})))"


def complete_hypergraph(signature: Signature, relation: str, n: int, k: int) -> FinStructure:
    return FinStructure.build(signature, (n,), {relation: permutations(range(n), k)})


def _hypergraph_facts(edges) -> List[tuple]:
    return [p for edge in edges for p in permutations(edge)]


# -- builders ---------------------------------------------------------------


def _graphs() -> ClassSpec:
    signature = Signature.single_sorted({"E": 2})
    return ClassSpec(
        "graphs",
        signature,
        (
            Parametric(parse_sentence("(forall (x V) (not (E x x)))", signature), "irreflexive"),
            Parametric(
                parse_sentence("(forall ((x V) (y V)) (implies (not (= x y)) (iff (E x y) (E y x))))", signature),
                "symmetric",
            ),
        ),
        certified_amalgamation=True,
    )


def _tournaments() -> ClassSpec:
    signature = Signature.single_sorted({"E": 2})
    return ClassSpec(
        "tournaments",
        signature,
        (
            Parametric(parse_sentence("(forall (x V) (not (E x x)))", signature), "irreflexive"),
            Parametric(
                parse_sentence(
                    "(forall ((x V) (y V)) (implies (not (= x y)) (iff (E x y) (not (E y x)))))", signature
                ),
                "one direction",
            ),
        ),
        certified_amalgamation=True,
    )


def _knk(n: int = 3, k: int = 2) -> ClassSpec:
    n, k = _positive("n", n), _positive("k", k)
    if n < k:
        raise ValueError(f"knk needs n >= k, got n={n}, k={k}")
    signature = Signature.single_sorted({"E": k})
    name = "triangle-free" if (n, k) == (3, 2) else _name("knk", n=n, k=k)
    return ClassSpec(
        name,
        signature,
        (
            Local(parse_sentence(hypergraph_sentence("E", k), signature), f"{k}-hypergraph"),
            ForbiddenInduced(complete_hypergraph(signature, "E", n, k), f"K_{n}^{k}"),
        ),
    )


def _triangle_free() -> ClassSpec:
    return _knk(3, 2)


def _two_graph() -> ClassSpec:
    signature = Signature.single_sorted({"R": 3})
    odd = [
        ("one triple", [(0, 1, 2)]),
        ("three triples", [(0, 1, 2), (0, 1, 3), (0, 2, 3)]),
    ]
    constraints = [Local(parse_sentence(hypergraph_sentence("R", 3), signature), "3-hypergraph")]
    for label, edges in odd:
        structure = FinStructure.build(signature, (4,), {"R": _hypergraph_facts(edges)})
        constraints.append(ForbiddenInduced(structure, label))
    return ClassSpec("two-graph", signature, tuple(constraints))


def _simplicial_complexes() -> ClassSpec:
    signature = Signature.single_sorted({"E": 2, "T": 3})
    edge = "(forall ((x V) (y V)) (implies (E x y) (and (not (= x y)) (E y x))))"
    face = (
        "(forall ((x V) (y V) (z V)) (implies (T x y z)"
        " (and (not (= x y)) (not (= x z)) (not (= y z)) (T y x z) (T x z y) (E x y) (E x z) (E y z))))"
    )
    return ClassSpec(
        "simplicial-complexes",
        signature,
        (
            Local(parse_sentence(edge, signature), "edges"),
            Local(parse_sentence(face, signature), "faces"),
        ),
        certified_amalgamation=True,
    )


def _equivalence(n: Optional[int] = None) -> ClassSpec:
    if n is not None:
        _positive("n", n)
    signature = Signature.single_sorted({"E": 2})
    return ClassSpec(_name("equivalence", n=n), signature, (Equivalence("E", 1, "V", max_classes=n),), filtration_n=n)


def _named_classes(k: int = 2) -> ClassSpec:
    k = _positive("k", k)
    labels = tuple(f"C{i + 1}" for i in range(k))
    signature = Signature(
        ("V",),
        (RelationSymbol("E", ("V", "V")),) + tuple(RelationSymbol(c, ("V",)) for c in labels),
    )
    equivalence = Equivalence("E", 1, "V")
    return ClassSpec(
        _name("named-classes", k=k),
        signature,
        (equivalence, Labeling(equivalence, labels)),
        certified_amalgamation=True,
    )


def _feq_signature(labels: Tuple[str, ...] = ()) -> Signature:
    relations = (RelationSymbol("E", ("P", "O", "O")),)
    relations += tuple(RelationSymbol(c, ("P", "O")) for c in labels)
    return Signature(("P", "O"), relations)


def _feq() -> ClassSpec:
    return ClassSpec("feq", _feq_signature(), (Equivalence("E", 1, "O", parameter_sort="P"),))


def _feq_bounded(n: int = 2) -> ClassSpec:
    n = _positive("n", n)
    return ClassSpec(
        _name("feq-bounded", n=n),
        _feq_signature(),
        (Equivalence("E", 1, "O", parameter_sort="P", max_classes=n),),
        filtration_n=n,
    )


def _feq_bounded_labeled(n: int = 2) -> ClassSpec:
    n = _positive("n", n)
    labels = tuple(f"C{i + 1}" for i in range(n))
    equivalence = Equivalence("E", 1, "O", parameter_sort="P")
    return ClassSpec(
        _name("feq-bounded-labeled", n=n),
        _feq_signature(labels),
        (equivalence, Labeling(equivalence, labels)),
        filtration_n=n,
        certified_amalgamation=True,
    )


def _cpz_relations(m: int) -> List[RelationSymbol]:
    return [RelationSymbol(f"E{k}", ("V",) * (2 * k)) for k in range(1, m + 1)]


def _cpz_equivalences(m: int, n: Optional[int] = None) -> List[Equivalence]:
    return [Equivalence(f"E{k}", k, "V", redundant_class=k >= 2, max_classes=n) for k in range(1, m + 1)]


def _cpz(m: int = 2) -> ClassSpec:
    m = _positive("m", m)
    return ClassSpec(_name("cpz", m=m), Signature(("V",), tuple(_cpz_relations(m))), tuple(_cpz_equivalences(m)))


def _cpz_bounded(m: int = 2, n: int = 2) -> ClassSpec:
    m, n = _positive("m", m), _positive("n", n)
    return ClassSpec(
        _name("cpz-bounded", m=m, n=n),
        Signature(("V",), tuple(_cpz_relations(m))),
        tuple(_cpz_equivalences(m, n)),
        filtration_n=n,
    )


def _cpz_bounded_labeled(m: int = 2, n: int = 2) -> ClassSpec:
    m, n = _positive("m", m), _positive("n", n)
    relations = _cpz_relations(m)
    constraints = []
    for k, equivalence in enumerate(_cpz_equivalences(m), start=1):
        # the redundant k-tuples get their own reserved label C<k>_0
        reserved = f"C{k}_0" if k >= 2 else None
        labels = ((reserved,) if reserved else ()) + tuple(f"C{k}_{i + 1}" for i in range(n))
        relations.extend(RelationSymbol(c, ("V",) * k) for c in labels)
        constraints.extend([equivalence, Labeling(equivalence, labels, reserved)])
    return ClassSpec(
        _name("cpz-bounded-labeled", m=m, n=n),
        Signature(("V",), tuple(relations)),
        tuple(constraints),
        filtration_n=n,
        certified_amalgamation=True,
    )


class ClassCatalog:
    """Registry of the built-in classes"""

    ENTRIES: Dict[str, dict] = {
        "graphs": {"builder": _graphs, "defaults": {}, "description": "Simple graphs"},
        "tournaments": {"builder": _tournaments, "defaults": {}, "description": "Tournaments (a parametric class)"},
        "knk": {
            "builder": _knk,
            "defaults": {"n": 3, "k": 2},
            "description": "K_n-free k-uniform hypergraphs",
        },
        "triangle-free": {"builder": _triangle_free, "defaults": {}, "description": "Triangle-free graphs (knk n=3, k=2)"},
        "two-graph": {
            "builder": _two_graph,
            "defaults": {},
            "description": "3-hypergraphs with an even number of triples on every 4 vertices",
        },
        "simplicial-complexes": {
            "builder": _simplicial_complexes,
            "defaults": {},
            "description": "2-dimensional simplicial complexes (a local class)",
        },
        "equivalence": {
            "builder": _equivalence,
            "defaults": {"n": None},
            "description": "One equivalence relation, optionally with at most n classes",
        },
        "named-classes": {
            "builder": _named_classes,
            "defaults": {"k": 2},
            "description": "Equivalence relation with k classes named by unary C1..Ck",
        },
        "feq": {"builder": _feq, "defaults": {}, "description": "Parametrized equivalence relations E_a on objects"},
        "feq-bounded": {
            "builder": _feq_bounded,
            "defaults": {"n": 2},
            "description": "feq with at most n classes per parameter",
        },
        "feq-bounded-labeled": {
            "builder": _feq_bounded_labeled,
            "defaults": {"n": 2},
            "description": "feq-bounded with classes labeled by C1..Cn",
        },
        "cpz": {
            "builder": _cpz,
            "defaults": {"m": 2},
            "description": "Equivalence relations E_k on k-tuples for k <= m, redundant tuples in one class",
        },
        "cpz-bounded": {
            "builder": _cpz_bounded,
            "defaults": {"m": 2, "n": 2},
            "description": "cpz with at most n classes of non-redundant tuples per arity",
        },
        "cpz-bounded-labeled": {
            "builder": _cpz_bounded_labeled,
            "defaults": {"m": 2, "n": 2},
            "description": "cpz-bounded with labels C<k>_1..C<k>_n and reserved C<k>_0",
        },
    }

    @classmethod
    def get_entry_info(cls, name):
        return cls.ENTRIES.get(name, {})

    @classmethod
    def names(cls) -> List[str]:
        return list(cls.ENTRIES.keys())

    @classmethod
    def register(cls, name: str, builder: Callable[..., ClassSpec], defaults=None, description: str = ""):
        """Add a class to the catalog"""
        cls.ENTRIES[name] = {"builder": builder, "defaults": dict(defaults or {}), "description": description}
        logger.info(f"Added class to catalog: {name}")

    @classmethod
    def build(cls, name: str, **params) -> ClassSpec:
        entry = cls.get_entry_info(name)
        if not entry:
            raise ValueError(f"Unknown class {name!r}; catalog has {cls.names()}")
        unknown = set(params) - set(entry["defaults"])
        if unknown:
            raise ValueError(f"{name} takes parameters {sorted(entry['defaults'])}, got {sorted(unknown)}")
        arguments = dict(entry["defaults"])
        arguments.update(params)
        spec = entry["builder"](**arguments)
        logger.debug(f"Built {spec.name} from catalog entry {name}")
        return spec

    @classmethod
    def describe(cls) -> List[dict]:
        rows = []
        for name in cls.names():
            entry = cls.ENTRIES[name]
            spec = cls.build(name)
            rows.append(
                {
                    "name": name,
                    "parameters": dict(entry["defaults"]),
                    "certified": spec.certified_amalgamation,
                    "description": entry["description"],
                }
            )
        return rows


def catalog(name: str, **params) -> ClassSpec:
    """Build a catalog class, e.g. ``catalog("knk", n=4, k=2)``."""
    return ClassCatalog.build(name, **params)


def _parse_value(text: str):
    lowered = text.strip().lower()
    if lowered in ("none", "null"):
        return None
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(lowered)
    except ValueError:
        return text.strip()


def parse_reference(reference: str) -> Tuple[str, dict]:
    """``"knk:n=4,k=2"`` -> ``("knk", {"n": 4, "k": 2})``."""
    name, _, rest = reference.partition(":")
    name = name.strip()
    if not name:
        raise ValueError(f"Empty class reference {reference!r}")
    params = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"Malformed parameter {item!r} in {reference!r}; expected key=value")
        params[key.strip()] = _parse_value(value)
    return name, params


def resolve_class(reference: str) -> ClassSpec:
    """A JSON spec file path or a catalog reference."""
    if reference.endswith(".json") or os.path.isfile(reference):
        logger.info(f"Loading class spec from {reference}")
        return ClassSpec.load(reference)
    name, params = parse_reference(reference)
    return catalog(name, **params)


def export_catalog(directory: str) -> List[str]:
    """Write every catalog class, with default parameters, as ``<name>.json``."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for name in ClassCatalog.names():
        path = os.path.join(directory, f"{name}.json")
        ClassCatalog.build(name).save(path)
        paths.append(path)
    logger.info(f"Exported {len(paths)} catalog classes to {directory}")
    return paths
