"""
Tests for the experiment harness

Tests cover:
- ExperimentConfig validation, size schedules and hashing
- The runner: battery rows, signals, early stopping, threads
- Filtration scans of extension axioms
- Wilson intervals and the runs test
- CSV, JSON and table reports
- Long-running convergence and divergence experiments (slow)
"""

import json
from math import sqrt

import pytest

from fraisse.classes.catalog import catalog
from fraisse.constants import BATTERY_ROW, FORMAT_JSON, FORMAT_TABLE, MEASURE_UNIFORM
from fraisse.harness.config import AxiomBattery, ExperimentConfig, expand_schedule, load_config, size_term
from fraisse.harness.report import COLUMNS, summarize, to_csv, write_result
from fraisse.harness.runner import ExperimentRunner, family_named, filtration_scan, run_experiment
from fraisse.harness.stats import half_width, runs_test, wilson_interval
from fraisse.logic.axioms import generate_axioms
from fraisse.logic.parser import parse_sentence
from fraisse.sampling.measure import failure_bound

IRREFLEXIVE = "(forall (x V) (not (E x x)))"
HAS_EDGE = "(exists ((x V) (y V)) (E x y))"


def graph_config(**changes):
    values = dict(
        name="smoke",
        class_ref="graphs",
        sizes=((4,), (6,)),
        sentences=(IRREFLEXIVE, HAS_EDGE),
        trials=20,
        seed=3,
        half_width_target=0.0,
    )
    values.update(changes)
    return ExperimentConfig(**values)


def classes_per_parameter(B):
    """Largest number of E-classes over the parameters of a feq structure."""
    edges = B.fact_set("E")
    counts = [
        len({frozenset(o2 for p2, o1, o2 in edges if p2 == p and o1 == o) for o in range(B.sizes[1])})
        for p in range(B.sizes[0])
    ]
    return max(counts, default=0)


class TestExperimentConfig:
    def test_defaults(self):
        cfg = graph_config()
        assert cfg.sizes == ((4,), (6,))
        assert cfg.measure == "mu"
        assert cfg.batch == 16

    @pytest.mark.parametrize(
        "changes, message",
        [
            ({"family": "feq", "family_n": 2}, "exactly one"),
            ({"measure": "lebesgue"}, "Unknown measure"),
            ({"mode": "bounded"}, "positive bound"),
            ({"trials": 0}, "trials"),
            ({"seed": -1}, "non-negative"),
            ({"sizes": ((6,), (4,))}, "strictly increasing"),
            ({"sizes": ()}, "at least one size"),
            ({"sentences": ()}, "battery is empty"),
            ({"format": "xml"}, "Unknown format"),
            ({"half_width_target": 0.7}, "half_width_target"),
        ],
    )
    def test_validation(self, changes, message):
        with pytest.raises(ValueError, match=message):
            graph_config(**changes)

    def test_family_needs_n(self):
        with pytest.raises(ValueError, match="positive 'n'"):
            ExperimentConfig(name="f", family="feq", sizes=((2, 3),), sentences=("feq-intersect",))

    def test_size_terms(self):
        assert size_term(7, 3) == 7
        assert size_term("7", 3) == 7
        assert size_term("n", 3) == 3
        assert size_term("2*n+1", 3) == 7
        assert size_term("n + 4", 3) == 7
        for bad in ("n*2", "m", "2*"):
            with pytest.raises(ValueError, match="a\\*n\\+b"):
                size_term(bad, 3)

    def test_schedule(self):
        assert expand_schedule({"n": [5, 10], "sizes": [2, "n"]}) == [(2, 5), (2, 10)]
        assert expand_schedule({"n": [3], "sizes": "2*n"}) == [(6,)]
        with pytest.raises(ValueError, match="needs 'n' and 'sizes'"):
            expand_schedule({"n": [3]})

    def test_from_dict(self):
        cfg = ExperimentConfig.from_dict(
            {
                "name": "feq-scan",
                "family": {"name": "feq", "n": 3},
                "schedule": {"n": [4, 8], "sizes": [3, "n"]},
                "battery": {"axioms": {"bound": 2, "universal": False}, "sentences": ["feq-intersect"]},
                "trials": 10,
            }
        )
        assert (cfg.family, cfg.family_n) == ("feq", 3)
        assert cfg.sizes == ((3, 4), (3, 8))
        assert cfg.axioms == AxiomBattery(bound=2, universal=False)
        assert cfg.to_dict()["family"] == {"name": "feq", "n": 3}

    def test_from_dict_errors(self):
        with pytest.raises(ValueError, match="not both"):
            ExperimentConfig.from_dict({"class": "graphs", "sizes": [3], "schedule": {"n": [3], "sizes": ["n"]}})
        with pytest.raises(ValueError, match="Malformed"):
            ExperimentConfig.from_dict({"class": "graphs", "sizes": [3], "battery": {"axioms": {"depth": 2}}})

    def test_overrides(self):
        cfg = graph_config()
        assert cfg.with_overrides() is cfg
        changed = cfg.with_overrides(seed=9, trials=5, sizes=[3, [5]], out="out.csv", format="json")
        assert (changed.seed, changed.trials, changed.sizes) == (9, 5, ((3,), (5,)))
        assert (changed.out, changed.format) == ("out.csv", "json")

    def test_config_hash(self):
        cfg = graph_config()
        assert cfg.config_hash() == graph_config().config_hash()
        assert len(cfg.config_hash()) == 16
        assert cfg.config_hash() == cfg.with_overrides(out="x.csv", format="table").config_hash()
        assert cfg.config_hash() != cfg.with_overrides(seed=4).config_hash()

    def test_load_config(self, tmp_path):
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps({"name": "file", "class": "graphs", "sizes": [3, 5], "battery": {"sentences": [IRREFLEXIVE]}}))
        cfg = load_config(str(path))
        assert cfg.name == "file"
        assert cfg.sizes == ((3,), (5,))
        cfg = load_config(str(path), {"batch": 4, "name": "ignored"})
        assert cfg.batch == 4
        assert cfg.name == "file"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="not valid JSON"):
            load_config(str(path))
        path.write_text("[1, 2]")
        with pytest.raises(ValueError, match="JSON object"):
            load_config(str(path))


class TestRunner:
    def test_rows(self):
        result = run_experiment(graph_config())
        assert len(result.rows) == 2 * 3
        assert result.class_name == "graphs"
        for size_index in range(2):
            irreflexive = result.row(size_index, "sentence1")
            has_edge = result.row(size_index, "sentence2")
            battery = result.row(size_index, BATTERY_ROW)
            assert irreflexive.successes == irreflexive.trials == 20
            assert battery.successes == has_edge.successes
            assert battery.ci_low <= battery.estimate <= battery.ci_high
            assert irreflexive.failure_bound is None
            assert len(battery.outcomes) == 20
        assert result.battery() == [result.row(0, BATTERY_ROW), result.row(1, BATTERY_ROW)]
        with pytest.raises(KeyError):
            result.row(2, "sentence1")

    def test_signals(self, qtbot):
        runner = ExperimentRunner(graph_config())
        started, finished = [], []
        runner.tier_started.connect(lambda index, sizes: started.append((index, sizes)))
        runner.tier_finished.connect(lambda index, rows: finished.append((index, len(rows))))
        with qtbot.waitSignal(runner.experiment_finished, timeout=60_000) as blocker:
            result = runner.run()
        assert blocker.args == [result]
        assert started == [(0, (4,)), (1, (6,))]
        assert finished == [(0, 3), (1, 3)]

    def test_axiom_battery(self):
        cfg = graph_config(sentences=(), axioms=AxiomBattery(bound=2), sizes=((8,),), trials=10)
        runner = ExperimentRunner(cfg)
        result = runner.run()
        names = [item.name for item in runner.battery]
        assert names[0].startswith("universal")
        assert any(name.startswith("ext") for name in names)
        for item, row in zip(runner.battery, result.rows):
            assert row.sentence == item.name
            if item.name.startswith("universal"):
                assert row.successes == row.trials
                assert row.failure_bound is None
            else:
                assert 0.0 <= row.failure_bound <= 1.0

    def test_early_stop(self):
        cfg = graph_config(sentences=(IRREFLEXIVE,), trials=1000, half_width_target=0.2, sizes=((4,),))
        result = run_experiment(cfg)
        assert {row.trials for row in result.rows} == {16}

    def test_family_experiment(self):
        cfg = ExperimentConfig(
            name="feq", family="feq", family_n=2, sizes=((2, 4),), sentences=("feq-intersect",), trials=6
        )
        runner = ExperimentRunner(cfg)
        assert runner.spec.name == "feq-bounded-labeled(n=2)"
        assert runner.member.name == "feq-bounded(n=2)"
        result = runner.run()
        assert result.row(0, "feq-intersect").trials == 6

    def test_uniform_measure(self):
        transitive = "(forall ((x V) (y V) (z V)) (implies (and (E x y) (E y z)) (E x z)))"
        cfg = ExperimentConfig(
            name="eq", class_ref="equivalence", measure=MEASURE_UNIFORM, sizes=((5,), (9,)), sentences=(transitive,), trials=10
        )
        result = run_experiment(cfg)
        assert all(row.successes == row.trials for row in result.rows)

    def test_sentences_are_checked_against_the_class(self):
        with pytest.raises(ValueError):
            ExperimentRunner(graph_config(sentences=("(exists (x V) (F x))",)))
        with pytest.raises(ValueError):
            ExperimentRunner(graph_config(sentences=("feq-intersect",)))

    def test_thread_count(self):
        with pytest.raises(ValueError, match="threads"):
            ExperimentRunner(graph_config(), threads=0)

    def test_worker_errors_propagate(self, qapp):
        runner = ExperimentRunner(graph_config(), threads=2)

        def boom(trial):
            raise RuntimeError(f"trial {trial} failed")

        with pytest.raises(RuntimeError, match="failed"):
            runner._run_batch(boom, range(3))

    def test_csv_is_independent_of_threads(self, qapp):
        cfg = ExperimentConfig(
            name="determinism",
            class_ref="triangle-free",
            sizes=((5,), (7,)),
            axioms=AxiomBattery(bound=2),
            sentences=(HAS_EDGE,),
            trials=40,
            seed=17,
            half_width_target=0.0,
        )
        single = to_csv(run_experiment(cfg, threads=1))
        assert to_csv(run_experiment(cfg, threads=8)) == single
        assert to_csv(run_experiment(cfg, threads=1)) == single


class TestFiltration:
    def test_family_named(self):
        family = family_named("feq")
        assert family.member(3).name == "feq-bounded(n=3)"
        assert family.sampling(3).name == "feq-bounded-labeled(n=3)"
        assert family_named("cpz", m=2).member(2).name == "cpz-bounded(m=2,n=2)"
        with pytest.raises(ValueError, match="Unknown filtration family"):
            family_named("tournaments")

    def test_extension_axioms_enter_at_their_class_count(self):
        axioms = generate_axioms(catalog("feq"), 4).extension
        assert len(axioms) >= 20
        counts = [classes_per_parameter(axiom.B) for axiom in axioms]
        assert {1, 2, 3} <= set(counts)
        family = family_named("feq")
        for axiom, c in zip(axioms, counts):
            rows = filtration_scan(family, axiom, [1, 2, 3, 4])
            assert [row.present for row in rows] == [n >= c for n in (1, 2, 3, 4)], axiom.name

    def test_sampled_rates(self):
        rows = filtration_scan(family_named("feq"), "feq-intersect", [1, 2], sizes=(2, 5), trials=8, seed=4)
        assert [row.present for row in rows] == [None, None]
        # one class per parameter makes every pair of classes meet
        assert rows[0].successes == rows[0].trials == 8
        assert rows[1].estimate is not None

    def test_class_count_threshold(self):
        three_classes = parse_sentence(
            "(exists ((x V) (y V) (z V)) (and (not (E1 x y)) (not (E1 x z)) (not (E1 y z))))"
        )
        rows = filtration_scan(family_named("cpz", m=2), three_classes, [1, 2, 3, 4], sizes=(6,), trials=40, seed=3)
        assert [row.present for row in rows] == [None] * 4
        assert [row.trials for row in rows] == [40] * 4
        # K_n allows at most n E1-classes
        assert rows[0].successes == rows[1].successes == 0
        assert rows[2].successes > 0
        assert rows[3].successes > 0

    def test_arguments(self):
        family = family_named("feq")
        with pytest.raises(ValueError, match="needs sizes"):
            filtration_scan(family, "feq-intersect", [2], trials=3)
        with pytest.raises(ValueError, match="non-negative"):
            filtration_scan(family, "feq-intersect", [2], sizes=(2, 3), trials=-1)
        with pytest.raises(ValueError, match="Unknown named sentence"):
            filtration_scan(family, "no-such-sentence", [2])


class TestStats:
    def test_wilson(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)
        low, high = wilson_interval(5, 10)
        assert low == pytest.approx(0.2366, abs=1e-3)
        assert high == pytest.approx(0.7634, abs=1e-3)
        low, high = wilson_interval(20, 20)
        assert high == pytest.approx(1.0)
        assert 0.8 < low < 0.85
        with pytest.raises(ValueError):
            wilson_interval(3, 2)

    def test_half_width(self):
        assert half_width(5, 10) == pytest.approx((0.7634 - 0.2366) / 2, abs=1e-3)
        assert half_width(500, 1000) < half_width(5, 10)

    def test_runs(self):
        assert runs_test([True] * 10) == 1.0
        assert runs_test([True, False] * 20) < 1e-4
        assert runs_test([True] * 20 + [False] * 20) < 1e-4
        assert runs_test([True, True, False, False] * 10) > 0.5


class TestReport:
    @pytest.fixture(scope="class")
    def result(self):
        return run_experiment(graph_config(trials=10))

    def test_csv(self, result):
        text = summarize(result)
        lines = text.split("\r\n")
        assert lines[0] == ",".join(COLUMNS)
        assert len([line for line in lines if line]) == 1 + len(result.rows)
        assert lines[1].startswith("0,4,")
        assert "wall_time" not in text

    def test_json(self, result):
        document = json.loads(summarize(result, FORMAT_JSON))
        assert document["schema"] == 1
        assert document["metadata"]["class"] == "graphs"
        assert document["metadata"]["config_hash"] == graph_config(trials=10).config_hash()
        assert len(document["rows"]) == len(result.rows)
        assert "wall_time" not in document["rows"][0]

    def test_json_timing_on_request(self):
        result = run_experiment(graph_config(trials=4, include_timing=True))
        rows = json.loads(summarize(result, FORMAT_JSON))["rows"]
        assert all(row["wall_time"] >= 0 for row in rows)

    def test_table(self, result):
        lines = summarize(result, FORMAT_TABLE).splitlines()
        assert lines[0].split() == COLUMNS
        assert set(lines[1].replace(" ", "")) == {"-"}
        assert len(lines) == 2 + len(result.rows)

    def test_unknown_format(self, result):
        with pytest.raises(ValueError, match="Unknown format"):
            summarize(result, "xml")

    def test_write(self, result, tmp_path):
        path = tmp_path / "out.csv"
        write_result(result, str(path))
        assert path.read_bytes() == to_csv(result).encode("utf-8")


@pytest.mark.slow
@pytest.mark.statistical
class TestLongExperiments:
    def test_graph_extension_axioms_converge(self):
        cfg = ExperimentConfig(
            name="graphs-extension",
            class_ref="graphs",
            sizes=((16,), (32,), (64,)),
            axioms=AxiomBattery(bound=3, universal=False),
            trials=200,
            seed=1,
            half_width_target=0.0,
        )
        runner = ExperimentRunner(cfg)
        result = runner.run()
        assert result.row(2, BATTERY_ROW).estimate >= 0.98
        largest = 0.0
        for size_index in range(3):
            for item in runner.battery:
                row = result.row(size_index, item.name)
                assert row.failure_bound is not None
                failure_rate = 1.0 - row.estimate
                p = max(row.failure_bound, failure_rate)
                assert failure_rate <= row.failure_bound + 3 * sqrt(p * (1 - p) / row.trials), item.name
                if size_index == 2 and item.source.A.size == 2:
                    largest = max(largest, row.failure_bound)
        assert largest == pytest.approx(failure_bound(2, 0.25, 64))

    def test_feq_intersection_diverges_under_uniform_partitions(self):
        cfg = ExperimentConfig(
            name="feq-divergence",
            class_ref="feq",
            measure=MEASURE_UNIFORM,
            sizes=((2, 2), (2, 3), (2, 10), (2, 60)),
            sentences=("feq-intersect",),
            trials=200,
            seed=6,
            half_width_target=0.0,
        )
        result = run_experiment(cfg)
        rates = [result.row(i, "feq-intersect").estimate for i in range(4)]
        assert rates[0] > rates[3]
        assert rates[3] <= rates[2]
        assert min(rates) < 0.5

    def test_feq_intersection_holds_in_the_labeled_filtration(self):
        cfg = ExperimentConfig(
            name="feq-filtered",
            family="feq",
            family_n=3,
            sizes=((3, 40),),
            sentences=("feq-intersect",),
            trials=100,
            seed=7,
            half_width_target=0.0,
        )
        assert run_experiment(cfg).row(0, "feq-intersect").estimate >= 0.6

    def test_cpz_surjectivity_fails_under_uniform_partitions(self):
        cfg = ExperimentConfig(
            name="cpz-uniform",
            class_ref="cpz:m=2",
            measure=MEASURE_UNIFORM,
            sizes=((2,), (3,), (30,)),
            sentences=("cpz-surjective",),
            trials=200,
            seed=8,
            half_width_target=0.0,
        )
        result = run_experiment(cfg)
        rates = [result.row(i, "cpz-surjective").estimate for i in range(3)]
        assert rates[0] > rates[2]
        assert rates[2] < 0.5
