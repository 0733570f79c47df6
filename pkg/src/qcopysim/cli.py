"""Command-line front end: run scenario files or shipped presets, write reports."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ScenarioParseError
from .infometrics import build_ngram, observer_surprisal
from .scenario import load_preset, parse_scenario, preset_names, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qcopysim",
        description="Simulate information copying, measurement, and erasure "
        "in small quantum systems.",
    )
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--scenario", metavar="PATH", help="scenario file to run")
    mode.add_argument("--preset", metavar="NAME", help="shipped preset to run")
    mode.add_argument("--list-presets", action="store_true", help="list shipped presets")
    mode.add_argument(
        "--surprisal",
        nargs=2,
        metavar=("CORPUS", "TEXT"),
        help="report per-symbol surprisal of TEXT for a memorizing reader and "
        "an n-gram reader trained on CORPUS",
    )
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--trials", type=int, help="override the scenario trial count")
    p.add_argument("--out", metavar="PATH", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--order", type=int, default=0, help="n-gram order for --surprisal")
    p.add_argument("--encoding", default="utf-8", help="text encoding for --surprisal files")
    return p


def _write(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _run_surprisal(args) -> int:
    corpus_path, text_path = args.surprisal
    try:
        corpus = Path(corpus_path).read_text(encoding=args.encoding)
        text = Path(text_path).read_text(encoding=args.encoding)
    except OSError as exc:
        print(f"error: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 1
    try:
        model = build_ngram(corpus, args.order)
        model_bits = observer_surprisal(model, text)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    memorized_bits = observer_surprisal(corpus, text)
    lines = ["observer,bits_per_symbol"]
    lines.append(f"memorized,{memorized_bits:.9g}")
    lines.append(f"ngram_order_{args.order},{model_bits:.9g}")
    _write("\n".join(lines) + "\n", args.out)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.list_presets:
        _write("\n".join(preset_names()) + "\n", args.out)
        return 0
    if args.surprisal:
        return _run_surprisal(args)
    if not args.scenario and not args.preset:
        print("error: one of --scenario, --preset, --list-presets, --surprisal "
              "is required", file=sys.stderr)
        return 1

    try:
        if args.preset:
            scenario = load_preset(args.preset)
        else:
            path = Path(args.scenario)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                print(f"error: cannot read scenario {path}: {exc.strerror}", file=sys.stderr)
                return 1
            scenario = parse_scenario(text, name=path.stem)
    except (ScenarioParseError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    report = run_scenario(scenario, seed=args.seed, trials=args.trials)
    _write(report.to_csv() if args.format == "csv" else report.to_text(), args.out)

    if report.results and report.hard_failure_count() == len(report.results):
        for tr in report.results:
            step, name, message = tr.error
            print(f"trial {tr.trial} step {step}: {name}: {message}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
