"""Command-line entry point: ``tracedp <subcommand> ...``.

Exit codes: 0 success, 1 runtime error (or failed ``dpcheck``), 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import dp_mech
from .baseline import anonymize_laplace
from .dpcheck import MICRO_VARIANTS, dp_smoke_test
from .evaluation import compare
from .event_log import (
    EventLog,
    Trace,
    format_variants,
    load_log,
    load_variants,
    variant_query,
    write_variants,
)
from .rules import ScoreFunction, derive_rules
from .sacofa import AnonymizationConfig, anonymize
from .validation import check_pruning

logger = logging.getLogger("tracedp")

MECHANISMS = ("sacofa", "laplace")

ANONYMIZE_DEFAULTS = {
    "mechanism": "sacofa",
    "score": "binary",
    "cap": 3,
}


class UsageError(Exception):
    pass


def load_flat_config(path) -> dict[str, str]:
    """Read ``key = value`` lines (``#`` comments) into a dict with
    underscore-normalized keys."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"{path}: {exc}") from None
    return {k.replace("-", "_"): v.strip().strip('"') for k, v in parser["config"].items()}


def _threshold(text) -> float:
    if str(text).strip().lower() in ("inf", "infinity"):
        return math.inf
    value = float(text)
    if value != int(value):
        raise argparse.ArgumentTypeError(f"threshold must be an integer or 'inf', got {text}")
    return int(value)


def _u64(text) -> int:
    value = int(text)
    if not 0 <= value <= dp_mech.U64_MAX:
        raise argparse.ArgumentTypeError(f"seed out of range: {text}")
    return value


def _column_map(args) -> dict:
    return {"case": args.case_col, "activity": args.activity_col, "order": args.order_col}


def _add_columns(sub):
    sub.add_argument("--case-col", default="case")
    sub.add_argument("--activity-col", default="activity")
    sub.add_argument("--order-col", default="timestamp")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracedp", description="Differentially private trace-variant queries."
    )
    parser.add_argument("--log-level", default="INFO")
    subs = parser.add_subparsers(dest="command", required=True)

    an = subs.add_parser("anonymize", help="release a private trace-variant distribution")
    an.add_argument("--config", help="flat key = value file; flags win")
    an.add_argument("--input", help="CSV event log or variant list")
    an.add_argument("--mechanism", choices=MECHANISMS)
    an.add_argument("--epsilon", type=float)
    an.add_argument("--k", type=int)
    an.add_argument("--p", type=_threshold)
    an.add_argument("--p-harmless", type=_threshold)
    an.add_argument("--p-harmful", type=_threshold)
    an.add_argument("--score", choices=("binary", "continuous"))
    an.add_argument("--cap", type=int)
    an.add_argument("--seed", type=_u64)
    an.add_argument("--output")
    an.add_argument("--report")
    _add_columns(an)

    ru = subs.add_parser("rules", help="print the behavioural rule matrices as TSV")
    ru.add_argument("--input", required=True)
    ru.add_argument("--output")
    _add_columns(ru)

    st = subs.add_parser("stats", help="summarize a log and list its variants")
    st.add_argument("--input", required=True)
    _add_columns(st)

    co = subs.add_parser("compare", help="utility metrics of an anonymized distribution")
    co.add_argument("--original", required=True)
    co.add_argument("--anonymized", required=True)
    co.add_argument("--output")
    _add_columns(co)

    sw = subs.add_parser("sweep", help="run a mechanism x epsilon x seed grid")
    sw.add_argument("--grid", required=True)
    sw.add_argument("--input")
    sw.add_argument("--mechanisms")
    sw.add_argument("--epsilons")
    sw.add_argument("--seeds", type=int)
    sw.add_argument("--base-seed", type=_u64)
    sw.add_argument("--output")
    sw.add_argument("--jobs", type=int, default=1)
    _add_columns(sw)

    dc = subs.add_parser("dpcheck", help="Monte Carlo neighbouring-log ratio test")
    dc.add_argument("--mechanism", choices=MECHANISMS + ("both",), default="both")
    dc.add_argument("--runs", type=int, default=100_000)
    dc.add_argument("--epsilon", type=float, default=1.0)
    dc.add_argument("--k", type=int, default=2)
    dc.add_argument("--p", type=int, default=1)
    dc.add_argument("--seed", type=_u64, default=0)
    dc.add_argument("--extra-trace", default="a,b", help="comma-joined trace added to the micro log")
    return parser


def _resolve(args, keys, config, defaults):
    """Fill unset flags from the config file, then from defaults."""
    out = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is None and key in config:
            value = config[key]
        if value is None:
            value = defaults.get(key)
        out[key] = value
    return out


def _pruning_from(values):
    try:
        return check_pruning(
            None if values.get("p") is None else _threshold(values["p"]),
            None if values.get("p_harmless") is None else _threshold(values["p_harmless"]),
            None if values.get("p_harmful") is None else _threshold(values["p_harmful"]),
        )
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from None


def run_mechanism(log, mechanism, epsilon, k, pruning, score_fn, seed, rules=None):
    if mechanism == "laplace":
        p = getattr(pruning, "p", None)
        if p is None:
            p = pruning.p_harmful
            if math.isinf(p):
                raise UsageError("laplace needs a finite p (or p_harmful to reuse)")
        return anonymize_laplace(log, epsilon, k, p, seed)
    cfg = AnonymizationConfig(epsilon, k, pruning, score_fn, seed)
    return anonymize(log, cfg, rules=rules)


def cmd_anonymize(args) -> int:
    config = load_flat_config(args.config) if args.config else {}
    keys = ("input", "mechanism", "epsilon", "k", "p", "p_harmless", "p_harmful",
            "score", "cap", "seed", "output", "report")
    # Flags given on the command line shadow the whole pruning group from the file.
    if any(getattr(args, key) is not None for key in ("p", "p_harmless", "p_harmful")):
        config = {k: v for k, v in config.items() if k not in ("p", "p_harmless", "p_harmful")}
    v = _resolve(args, keys, config, ANONYMIZE_DEFAULTS)
    for key in ("input", "epsilon", "k", "output"):
        if v[key] is None:
            raise UsageError(f"--{key} is required")
    if v["mechanism"] not in MECHANISMS:
        raise UsageError(f"unknown mechanism {v['mechanism']!r}")
    pruning = _pruning_from(v)
    if v["mechanism"] == "laplace" and (v["p_harmless"] is not None or v["p_harmful"] is not None):
        raise UsageError("laplace supports only --p")
    try:
        epsilon = float(v["epsilon"])
        k = int(v["k"])
        seed = dp_mech.new_seed() if v["seed"] is None else _u64(v["seed"])
        score_fn = ScoreFunction(v["score"], int(v["cap"]))
        AnonymizationConfig(epsilon, k, pruning, score_fn, seed)
    except (ValueError, TypeError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc)) from None

    logger.info(
        "config: mechanism=%s input=%s epsilon=%r k=%d pruning=%s score=%s cap=%d seed=%d output=%s",
        v["mechanism"], v["input"], epsilon, k, pruning, score_fn.mode, score_fn.cap, seed, v["output"],
    )
    log = load_log(v["input"], _column_map(args))
    dist, report = run_mechanism(log, v["mechanism"], epsilon, k, pruning, score_fn, seed)
    write_variants(dist, v["output"])
    if v["report"]:
        Path(v["report"]).write_text(report.to_text(), encoding="utf-8")
    logger.info(
        "emitted %d variants (%d traces); mechanism invocations: %d laplace, %d exponential",
        len(dist), dist.total(), report.laplace_draws, report.exp_selections,
    )
    for w in report.warnings:
        logger.warning(w)
    return 0


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_rules(args) -> int:
    log = load_log(args.input, _column_map(args))
    _emit(derive_rules(log).to_tsv(), args.output)
    return 0


def cmd_stats(args) -> int:
    log = load_log(args.input, _column_map(args))
    dist = variant_query(log)
    sys.stdout.write(f"cases\t{len(log)}\nvariants\t{len(dist)}\nactivities\t{len(log.activity_universe)}\n")
    sys.stdout.write(format_variants(dist))
    return 0


def cmd_compare(args) -> int:
    original = load_log(args.original, _column_map(args))
    anonymized = load_variants(args.anonymized)
    _emit(compare(original, anonymized).to_tsv(), args.output)
    return 0


SWEEP_COLUMNS = (
    "cell", "mechanism", "epsilon", "seed", "k", "pruning",
    "variant_recall", "variant_precision", "l1_distance", "normal_fraction",
    "total_count_original", "total_count_anonymized",
    "laplace_draws", "exp_selections",
)


def _run_cell(job):
    index, log, mechanism, epsilon, k, pruning, score_fn, seed = job
    rules = derive_rules(log)
    dist, report = run_mechanism(log, mechanism, epsilon, k, pruning, score_fn, seed, rules=rules)
    util = compare(log, dist, rules)
    row = [index, mechanism, repr(epsilon), seed, k, str(pruning)]
    row += [f"{x:.6f}" for x in (util.variant_recall, util.variant_precision,
                                 util.l1_distance, util.normal_fraction)]
    row += [util.total_count_original, util.total_count_anonymized,
            report.laplace_draws, report.exp_selections]
    return "\t".join(map(str, row))


def _split(text) -> list[str]:
    return [t.strip() for t in str(text).split(",") if t.strip()]


def cmd_sweep(args) -> int:
    config = load_flat_config(args.grid)
    overrides = {
        "input": args.input, "mechanisms": args.mechanisms, "epsilons": args.epsilons,
        "seeds": args.seeds, "base_seed": args.base_seed,
    }
    config.update({k: v for k, v in overrides.items() if v is not None})
    try:
        input_path = config["input"]
        mechanisms = _split(config.get("mechanisms", "sacofa,laplace"))
        epsilons = [float(e) for e in _split(config["epsilons"])]
        n_seeds = int(config.get("seeds", 10))
        base_seed = int(config.get("base_seed", 0))
        k = int(config["k"])
        score_fn = ScoreFunction(config.get("score", "binary"), int(config.get("cap", 3)))
    except KeyError as exc:
        raise UsageError(f"grid is missing key {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for m in mechanisms:
        if m not in MECHANISMS:
            raise UsageError(f"unknown mechanism {m!r}")
    pruning = _pruning_from(config)
    logger.info(
        "config: input=%s mechanisms=%s epsilons=%s seeds=%d base_seed=%d k=%d pruning=%s score=%s",
        input_path, ",".join(mechanisms), epsilons, n_seeds, base_seed, k, pruning, score_fn.mode,
    )

    log = load_log(input_path, _column_map(args))
    jobs = []
    for m in mechanisms:
        for eps in epsilons:
            for _ in range(n_seeds):
                index = len(jobs)
                seed = dp_mech.RandomSource.spawn(base_seed, index).seed
                jobs.append((index, log, m, eps, k, pruning, score_fn, seed))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_run_cell, jobs))
    else:
        rows = [_run_cell(job) for job in jobs]
    _emit("\t".join(SWEEP_COLUMNS) + "\n" + "".join(r + "\n" for r in rows), args.output)
    return 0


def cmd_dpcheck(args) -> int:
    extra = tuple(_split(args.extra_trace))
    if not extra:
        raise UsageError("--extra-trace must name at least one activity")
    seqs = [acts for acts, c in MICRO_VARIANTS.items() for _ in range(c)]
    small = EventLog.from_sequences(seqs)
    big = EventLog(small.traces + (Trace("extra", extra),))
    mechanisms = MECHANISMS if args.mechanism == "both" else (args.mechanism,)
    logger.info(
        "config: mechanisms=%s epsilon=%r k=%d p=%d runs=%d seed=%d extra_trace=%s",
        ",".join(mechanisms), args.epsilon, args.k, args.p, args.runs, args.seed, ",".join(extra),
    )
    ok = True
    for m in mechanisms:
        result = dp_smoke_test(small, big, m, args.epsilon, args.k, args.p, args.runs, args.seed)
        for line in result.lines():
            print(f"{m}\t{line}")
        print(f"{m}\t{'PASS' if result.passed else 'FAIL'}")
        ok &= result.passed
    return 0 if ok else 1


COMMANDS = {
    "anonymize": cmd_anonymize,
    "rules": cmd_rules,
    "stats": cmd_stats,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "dpcheck": cmd_dpcheck,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (OSError, ValueError) as exc:
        print(f"tracedp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
