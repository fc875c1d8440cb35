"""Command line interface.

Subcommands: phys, att, analyze, compare, simulate. Exit status is 0 on
success, 1 for input or validation problems (message on stderr names the
file), 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import attention, distribution, fuzzsim, graphs, physical, scoring
from .errors import InputError


def _add_graph_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--callgraph", required=True, help="call graph JSON file")
    parser.add_argument("--cfg-dir", required=True, help="directory of per-function CFG JSON")
    parser.add_argument("--targets", required=True, help="targets file (path/file.c:LINE lines)")


def _load_with_targets(args):
    program = graphs.load_program(args.callgraph, args.cfg_dir)
    locations = graphs.load_targets_file(args.targets)
    targets = graphs.resolve_targets(program, locations)
    return program, targets


def _physical_map(program, targets, c: Fraction) -> physical.DistanceMap:
    fdist = physical.function_distances(program, targets)
    return physical.block_distances(program, targets, fdist,
                                    physical.DistanceConfig(c=c))


def _cmd_phys(args) -> int:
    program, targets = _load_with_targets(args)
    dmap = _physical_map(program, targets, args.c)
    physical.write_distance_csv(dmap, args.out)
    print(f"wrote {len(dmap.values)} block distances to {args.out}", file=sys.stderr)
    return 0


def _cmd_att(args) -> int:
    program, targets = _load_with_targets(args)
    phys = _physical_map(program, targets, args.c)
    line_scores = scoring.load_line_scores(args.scores)
    if phys.values:
        raw_all = scoring.block_raw_scores(program, line_scores)
        # normalization population: exactly the blocks with a physical distance
        raw = {ref: raw_all[ref] for ref in phys.values}
        table = scoring.normalize_scores(raw, cap_fraction=args.cap)
        dmap = attention.attention_distances(
            phys, table, attention.AttentionConfig(s_a=args.s_a))
    else:
        dmap = physical.DistanceMap(metric=physical.ATTENTION, values={}, block_keys={})
    physical.write_distance_csv(dmap, args.out)
    print(f"wrote {len(dmap.values)} block distances to {args.out}", file=sys.stderr)
    return 0


def _cmd_analyze(args) -> int:
    dmap = physical.load_distance_csv(args.dist, args.metric)
    report = distribution.analyze(dmap)
    if args.json:
        print(json.dumps(distribution.report_to_dict(report), indent=2, sort_keys=True))
    else:
        print(distribution.render_report(report))
    return 0


def _cmd_compare(args) -> int:
    phys = physical.load_distance_csv(args.phys, physical.PHYSICAL)
    att = physical.load_distance_csv(args.att, physical.ATTENTION)
    report = distribution.compare(phys, att)
    if args.freq_out:
        distribution.write_frequency_csv(report, phys, att, args.freq_out)
        print(f"wrote per-value frequencies to {args.freq_out}", file=sys.stderr)
    if args.json:
        print(json.dumps(distribution.comparison_to_dict(report), indent=2, sort_keys=True))
    else:
        print(distribution.render_comparison(report))
    return 0


def _cmd_simulate(args) -> int:
    program, targets = _load_with_targets(args)
    config = fuzzsim.load_experiment_config(args.config)
    runs = args.runs if args.runs is not None else config.runs
    budget = args.budget if args.budget is not None else config.budget
    rng_base = args.rng_base if args.rng_base is not None else config.rng_base
    phys = physical.attach_distances(
        program, physical.load_distance_csv(args.phys, physical.PHYSICAL),
        physical.PHYSICAL)
    att = physical.attach_distances(
        program, physical.load_distance_csv(args.att, physical.ATTENTION),
        physical.ATTENTION)
    prog = fuzzsim.make_sim_program(program, targets, config.branch_bias, args.entry)
    result = fuzzsim.run_experiment(prog, phys, att, runs=runs, budget=budget,
                                    rng_base=rng_base)
    if args.runs_out:
        fuzzsim.write_runs_csv(result, args.runs_out)
        print(f"wrote per-run results to {args.runs_out}", file=sys.stderr)
    text = json.dumps(result.summary(), indent=2, sort_keys=True)
    if args.summary_out:
        with open(args.summary_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
        print(f"wrote summary to {args.summary_out}", file=sys.stderr)
    else:
        print(text)
    return 0


def _fraction(text: str) -> Fraction:
    return Fraction(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuzzdist",
        description="distance guidance toolkit for directed grey-box fuzzing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phys", help="compute physical block distances")
    _add_graph_args(p)
    p.add_argument("-c", type=_fraction, default=Fraction(10), metavar="C",
                   help="call transition scale (default 10)")
    p.add_argument("--out", required=True, help="output distance CSV")
    p.set_defaults(func=_cmd_phys)

    p = sub.add_parser("att", help="compute attention-weighted block distances")
    _add_graph_args(p)
    p.add_argument("--scores", required=True, help="line score CSV (file,line,score)")
    p.add_argument("-c", type=_fraction, default=Fraction(10), metavar="C",
                   help="call transition scale (default 10)")
    p.add_argument("--s-a", type=_fraction, default=Fraction(3, 2), metavar="S",
                   help="scale anchor, must exceed 1 (default 1.5)")
    p.add_argument("--cap", type=_fraction, default=Fraction(1, 10), metavar="F",
                   help="top fraction of raw scores clamped (default 0.1)")
    p.add_argument("--out", required=True, help="output distance CSV")
    p.set_defaults(func=_cmd_att)

    p = sub.add_parser("analyze", help="distribution report for one distance CSV")
    p.add_argument("--dist", required=True, help="distance CSV to analyze")
    p.add_argument("--metric", choices=[physical.PHYSICAL, physical.ATTENTION],
                   default=physical.PHYSICAL, help="metric label for the report")
    p.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("compare", help="contrast physical and attention CSVs")
    p.add_argument("--phys", required=True, help="physical distance CSV")
    p.add_argument("--att", required=True, help="attention distance CSV")
    p.add_argument("--freq-out", help="write per-value frequency CSV here")
    p.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("simulate", help="run paired guided-campaign simulations")
    _add_graph_args(p)
    p.add_argument("--phys", required=True, help="physical distance CSV")
    p.add_argument("--att", required=True, help="attention distance CSV")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--entry", help="entry function (default: unique root, else main)")
    p.add_argument("--runs", type=int, help="override runs from the config")
    p.add_argument("--budget", type=int, help="override budget from the config")
    p.add_argument("--rng-base", type=int, help="override rng base from the config")
    p.add_argument("--summary-out", help="write the JSON summary here instead of stdout")
    p.add_argument("--runs-out", help="write the per-run CSV here")
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"fuzzdist: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
