"""Command-line entry point.

Subcommands: gen (build a dataset), exec (run the rule-based executor over a
dataset), prompt (render prompt text files), eval (grade predictions),
route-sim (routed-ensemble accuracy), serve (start the HTTP service).
Exit codes: 0 success, 1 operational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .dataset_io import read_dataset, read_predictions, write_dataset
from .errors import AssemblyError
from .evaluation import load_routing_spec, route_composite, score, simulate_routing
from .executor import apply_text
from .generation import GenConfig, default_manifest, ingest_manifest, make_dataset
from .prompts import LENIENT, MODE_PLACEHOLDER, PROMPT_MODES, STRICT, build_prompt, format_timeline
from .reporting import (
    format_report_table,
    format_routing_table,
    write_report_files,
    write_routing_files,
)
from .templates import load_templates


def _length_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    if not sep or not lo.isdigit() or not hi.isdigit():
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    return int(lo), int(hi)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="assembly-bench",
        description="Instructed timeline assembly: dataset generation, oracle "
        "execution, prompt rendering, scoring, and a local editing service.",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for gen and route-sim")
    parser.add_argument(
        "--templates",
        default=None,
        help="instruction template JSON (default: $ASSEMBLY_BENCH_TEMPLATES or bundled)",
    )
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="generate a dataset JSONL")
    gen.add_argument("--manifest", default=None, help="source sequence manifest (default: bundled)")
    gen.add_argument("--out", required=True, help="output dataset path")
    gen.add_argument("--collection-size", type=int, default=20)
    length = gen.add_mutually_exclusive_group()
    length.add_argument("--length", type=int, default=None, help="fixed timeline length")
    length.add_argument(
        "--length-range", type=_length_range, default=None, metavar="LO:HI",
        help="sample lengths uniformly from LO..HI",
    )
    gen.add_argument("--per-task", type=int, default=80)
    gen.add_argument("--compositional", action="store_true", help="two-op semantic instructions")
    gen.add_argument("--split", choices=("train", "val", "test"), default="test")

    exec_ = commands.add_parser("exec", help="run the executor over dataset samples")
    exec_.add_argument("--dataset", required=True)
    which = exec_.add_mutually_exclusive_group(required=True)
    which.add_argument("--sample", default=None, help="run one sample by id")
    which.add_argument("--all", action="store_true", help="run every sample")
    exec_.add_argument(
        "--strict", action="store_true", help="stop at the first disagreement or error"
    )

    prompt = commands.add_parser("prompt", help="render prompt text files")
    prompt.add_argument("--dataset", required=True)
    prompt.add_argument("--mode", choices=PROMPT_MODES, default=MODE_PLACEHOLDER)
    prompt.add_argument("--out-dir", required=True)

    evaluate = commands.add_parser("eval", help="score predictions against a dataset")
    evaluate.add_argument("--dataset", required=True)
    evaluate.add_argument(
        "--predictions", required=True, help="JSONL of {sample_id, response} or a directory"
    )
    evaluate.add_argument(
        "--lenient", action="store_true",
        help="repair near-JSON model output before parsing (default: strict)",
    )
    evaluate.add_argument("--report", default=None, metavar="DIR",
                          help="also write report.json/.csv/.png under DIR")

    route = commands.add_parser("route-sim", help="routed-ensemble composite accuracy")
    route.add_argument("--spec", default=None, help="routing spec JSON (default: bundled)")
    route.add_argument("--trials", type=int, default=100_000,
                       help="Monte-Carlo trials per task, 0 to skip simulation")
    route.add_argument("--report", default=None, metavar="DIR",
                       help="also write routing.json/.csv/.png under DIR")

    serve = commands.add_parser("serve", help="start the local HTTP service")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--host", default="127.0.0.1")

    return parser


def _templates_for(args):
    path = args.templates or os.environ.get("ASSEMBLY_BENCH_TEMPLATES") or None
    return load_templates(path)


def _manifest_for(path: str | None):
    return default_manifest() if path is None else ingest_manifest(path)


def _cmd_gen(args) -> int:
    if args.length_range is not None:
        timeline_length = args.length_range
    else:
        timeline_length = 5 if args.length is None else args.length
    cfg = GenConfig(
        collection_size=args.collection_size,
        timeline_length=timeline_length,
        samples_per_task=args.per_task,
        seed=args.seed,
        compositional=args.compositional,
        split=args.split,
    )
    manifest = _manifest_for(args.manifest)
    samples, summary = make_dataset(manifest, cfg, _templates_for(args))
    write_dataset(samples, args.out)
    if not args.quiet:
        print(f"wrote {summary['total']} samples to {args.out} (skipped {summary['skipped']})")
        for bucket, count in summary["counts"].items():
            print(f"  {bucket}: {count}")
    return 0


def _cmd_exec(args) -> int:
    samples = read_dataset(args.dataset)
    if args.sample is not None:
        chosen = [s for s in samples if s.sample_id == args.sample]
        if not chosen:
            print(f"error: no sample {args.sample!r} in {args.dataset}", file=sys.stderr)
            return 1
        samples = chosen
    disagreements = 0
    for sample in samples:
        try:
            predicted, _ = apply_text(sample.instruction, sample.input_timeline, sample.collection)
        except AssemblyError as exc:
            disagreements += 1
            print(f"{sample.sample_id}: error: {exc}", file=sys.stderr)
            if args.strict:
                return 1
            continue
        agrees = predicted.entries == sample.output_timeline.entries
        if args.sample is not None:
            print(format_timeline(predicted.entries))
        elif not args.quiet:
            print(f"{sample.sample_id}: {' '.join(predicted.entries)}")
        if not agrees:
            disagreements += 1
            print(f"{sample.sample_id}: differs from gold", file=sys.stderr)
            if args.strict:
                return 1
    if args.all:
        total = len(samples)
        agreed = total - disagreements
        pct = 100.0 * agreed / total if total else 100.0
        print(f"agreement {agreed}/{total} ({pct:.1f}%)")
    return 0 if disagreements == 0 else 1


def _cmd_prompt(args) -> int:
    samples = read_dataset(args.dataset)
    os.makedirs(args.out_dir, exist_ok=True)
    for sample in samples:
        path = os.path.join(args.out_dir, f"{sample.sample_id}.txt")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(build_prompt(sample, args.mode))
    if not args.quiet:
        print(f"wrote {len(samples)} prompts to {args.out_dir}")
    return 0


def _cmd_eval(args) -> int:
    samples = read_dataset(args.dataset)
    predictions = read_predictions(args.predictions)
    report = score(predictions, samples, LENIENT if args.lenient else STRICT)
    print(format_report_table(report))
    if report.counts["missing"]:
        print(f"unscored samples without predictions: {report.counts['missing']}")
    if args.report:
        for path in write_report_files(report, args.report):
            if not args.quiet:
                print(f"wrote {path}")
    return 0


def _cmd_route_sim(args) -> int:
    spec = load_routing_spec(args.spec)
    closed = route_composite(spec)
    simulated = None
    if args.trials > 0:
        simulated = simulate_routing(spec, args.trials, seed=args.seed)
    print(format_routing_table(closed, simulated))
    if args.report:
        for path in write_routing_files(closed, simulated, args.report):
            if not args.quiet:
                print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    from .service import run_server

    run_server(
        host=args.host,
        port=args.port,
        manifest=None,
        templates=_templates_for(args),
    )
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "exec": _cmd_exec,
    "prompt": _cmd_prompt,
    "eval": _cmd_eval,
    "route-sim": _cmd_route_sim,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except AssemblyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
