import argparse
import json
import logging
import os
import sys

from fraisse.amalgamation import certify_levels, check_basic_disjoint_k_amalgamation
from fraisse.classes.catalog import ClassCatalog, export_catalog, resolve_class
from fraisse.classes.hereditary import check_hereditary
from fraisse.constants import (
    APP_VERSION,
    DEFAULT_BELL_TABLE_MAX,
    DEBUG_LOG_PATH,
    EXIT_AMALGAMATION_FAILURE,
    EXIT_CONFIG_ERROR,
    EXIT_OK,
    MODE_BOUNDED,
    MODE_UNBOUNDED,
    OUTPUT_FORMATS,
    SAMPLER_MODES,
)
from fraisse.enumeration import enumerate_level
from fraisse.errors import AmalgamationFailure
from fraisse.harness.config import load_config
from fraisse.harness.report import summarize, write_result
from fraisse.harness.runner import run_experiment
from fraisse.logic.evaluate import evaluate
from fraisse.logic.parser import parse_sentence
from fraisse.sampling.measure import LevelSampler, SamplerConfig, sample
from fraisse.settings import Settings
from fraisse.structures import literal
from fraisse.structures.isomorphism import count_isomorphism_types

# Default logging
DEFAULT_LOG_LEVEL = logging.INFO
logger = logging.getLogger(__name__)


def parse_sizes(text: str):
    """``"5"`` or ``"2,40"`` (one size per sort)."""
    try:
        sizes = [int(part) for part in text.split(",")]
    except ValueError:
        raise ValueError(f"Invalid size {text!r}: expected integers separated by commas")
    return sizes[0] if len(sizes) == 1 else sizes


def _guard(settings):
    return settings.get("enumeration_guard")


def cmd_catalog(args, settings):
    if args.export:
        for path in export_catalog(args.export):
            print(path)
        return EXIT_OK
    for row in ClassCatalog.describe():
        params = ",".join(f"{k}={v}" for k, v in row["parameters"].items())
        certified = "certified" if row["certified"] else ""
        print(f"{row['name']:<22} {params:<12} {certified:<10} {row['description']}")
    return EXIT_OK


def cmd_enumerate(args, settings):
    spec = resolve_class(args.class_ref)
    members = enumerate_level(spec, parse_sizes(args.size), _guard(settings))
    print(f"{spec.name}: {len(members)} labeled members on {args.size}")
    if args.iso:
        print(f"{count_isomorphism_types(members, settings.get('isomorphism_guard'))} isomorphism types")
    if args.emit:
        for index, M in enumerate(members):
            print(f"# member {index}")
            print(literal.dumps(M), end="")
    return EXIT_OK


def cmd_check(args, settings):
    spec = resolve_class(args.class_ref)
    guard = _guard(settings)
    if args.all_up_to is not None:
        reports = certify_levels(spec, args.all_up_to, guard)
    else:
        reports = [check_basic_disjoint_k_amalgamation(spec, args.level, guard)]
    for report in reports:
        print(json.dumps(report.to_dict(), sort_keys=True))
    if args.hereditary is not None:
        hereditary, counterexample = check_hereditary(spec, args.hereditary, guard)
        data = {"hereditary": hereditary, "up_to": args.hereditary}
        if counterexample is not None:
            data["member"] = literal.dumps(counterexample[0])
            data["substructure"] = literal.dumps(counterexample[1])
        print(json.dumps(data, sort_keys=True))
    return EXIT_OK


def cmd_sample(args, settings):
    spec = resolve_class(args.class_ref)
    cfg = SamplerConfig(
        spec,
        parse_sizes(args.size),
        mode=args.mode,
        seed=args.seed,
        bound=args.bound,
        verify=args.verify,
        certify_max_level=settings.get("certify_max_level"),
        guard=_guard(settings),
        bell_bound=settings.get("bell_table_max", DEFAULT_BELL_TABLE_MAX),
    )
    level_sampler = LevelSampler(cfg) if args.mode in (MODE_UNBOUNDED, MODE_BOUNDED) else None
    facts = [0] * len(spec.signature.relations)
    for trial in range(args.trials):
        M = level_sampler.sample(trial_index=trial) if level_sampler else sample(cfg.for_trial(trial))
        for r, fact_set in enumerate(M.facts):
            facts[r] += len(fact_set)
        if args.emit == "literal":
            print(f"# trial {trial}")
            print(literal.dumps(M), end="")
    if args.emit == "none":
        means = ", ".join(f"{r.name}={n / args.trials:.3f}" for r, n in zip(spec.signature.relations, facts))
        print(f"{spec.name}: {args.trials} samples of size {args.size}, mean facts {means}")
    return EXIT_OK


def cmd_eval(args, settings):
    signature = resolve_class(args.class_ref).signature if args.class_ref else None
    M = literal.load(args.structure, signature)
    sentence = parse_sentence(args.sentence, M.signature)
    print("true" if evaluate(M, sentence) else "false")
    return EXIT_OK


def _experiment_defaults(settings) -> dict:
    """Stored settings fill keys the experiment file leaves out."""
    defaults = {
        "half_width_target": settings.get("half_width_target"),
        "batch": settings.get("trial_batch"),
        "format": settings.get("output_format"),
    }
    return {key: value for key, value in defaults.items() if value is not None}


def cmd_experiment(args, settings):
    cfg = load_config(args.config, _experiment_defaults(settings)).with_overrides(
        seed=args.seed,
        trials=args.trials,
        sizes=[parse_sizes(s) for s in args.sizes] if args.sizes else None,
        out=args.out,
        format=args.format,
    )
    result = run_experiment(cfg, settings.threads())
    if cfg.out:
        write_result(result, cfg.out, cfg.format)
    else:
        print(summarize(result, cfg.format), end="")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fraisse",
        description="Fraisse class workbench: enumeration, amalgamation checks and zero-one law experiments",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--debug", action="store_true", help=f"Verbose logging, also written to {DEBUG_LOG_PATH}")
    parser.add_argument("--version", action="version", version=f"%(prog)s {APP_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("catalog", help="List the built-in classes")
    p.add_argument("--export", metavar="DIR", help="Write every class as a JSON spec file")
    p.set_defaults(handler=cmd_catalog)

    p = commands.add_parser("enumerate", help="Enumerate K(n)")
    p.add_argument("--class", dest="class_ref", required=True, help="Catalog reference or spec file")
    p.add_argument("--size", required=True, help="Domain size, comma separated per sort")
    p.add_argument("--emit", action="store_true", help="Print every member as a literal")
    p.add_argument("--iso", action="store_true", help="Also count isomorphism types")
    p.set_defaults(handler=cmd_enumerate)

    p = commands.add_parser("check", help="Check basic disjoint k-amalgamation")
    p.add_argument("--class", dest="class_ref", required=True)
    p.add_argument("--level", type=int, default=3)
    p.add_argument("--all-up-to", type=int, default=None, help="Check every level from 2 up to K")
    p.add_argument("--hereditary", type=int, default=None, metavar="N", help="Also check closure under substructures up to N")
    p.set_defaults(handler=cmd_check)

    p = commands.add_parser("sample", help="Draw random members")
    p.add_argument("--class", dest="class_ref", required=True)
    p.add_argument("--size", required=True)
    p.add_argument("--mode", choices=SAMPLER_MODES, default=MODE_UNBOUNDED)
    p.add_argument("--bound", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--emit", choices=["literal", "none"], default="literal")
    p.add_argument("--verify", action="store_true", help="Check membership of every sample")
    p.set_defaults(handler=cmd_sample)

    p = commands.add_parser("eval", help="Evaluate a sentence on a structure literal")
    p.add_argument("--structure", required=True, help="Literal file")
    p.add_argument("--sentence", required=True, help="S-expression sentence")
    p.add_argument("--class", dest="class_ref", default=None, help="Class supplying the signature")
    p.set_defaults(handler=cmd_eval)

    p = commands.add_parser("experiment", help="Run a zero-one law experiment")
    p.add_argument("--config", required=True, help="Experiment JSON file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--sizes", nargs="+", default=None, help="Sizes, each comma separated per sort")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=OUTPUT_FORMATS, default=None)
    p.set_defaults(handler=cmd_experiment)
    return parser


def configure_logging(debug: bool):
    log_level = logging.DEBUG if debug else DEFAULT_LOG_LEVEL
    logging.basicConfig(level=log_level)
    if debug:
        os.makedirs(os.path.dirname(DEBUG_LOG_PATH), exist_ok=True)
        debug_handler = logging.FileHandler(DEBUG_LOG_PATH, mode="w", encoding="utf-8")
        debug_handler.setLevel(logging.DEBUG)
        debug_handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s [%(name)s] %(message)s"))
        logging.getLogger().addHandler(debug_handler)
        logger.debug(f"Debug log at {DEBUG_LOG_PATH}")


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.debug)
    try:
        settings = Settings()
        return args.handler(args, settings)
    except AmalgamationFailure as e:
        logger.error(str(e))
        if e.witness is not None:
            print(json.dumps(e.witness.to_dict(), sort_keys=True), file=sys.stderr)
        return EXIT_AMALGAMATION_FAILURE
    except (ValueError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_CONFIG_ERROR


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
