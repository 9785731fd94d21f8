"""Command-line front end: ``subgames {gen,solve,bench,sensitivity}``.

Exit codes: 0 success, 1 solver precondition failure, 2 usage error,
3 missing input file, 4 malformed game file.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import __version__
from .classical_solvers import require_restricted
from .experiments import (
    CASES,
    SOLVERS,
    read_scaling_csv,
    read_sensitivity_csv,
    run_scaling,
    run_sensitivity,
    scaling_csv,
    sensitivity_csv,
    summarize_scaling,
    summarize_sensitivity,
    wilson_interval,
)
from .game_core import ParseError, classify, parse, serialize, win_values
from .game_gen import GenConfig, GenerationError, Variant, gen_balanced, gen_dense_uniform, gen_restricted
from .oracle import CountingOracle, PromiseViolation
from .rng import make_rng

EXIT_OK = 0
EXIT_PRECONDITION = 1
EXIT_USAGE = 2
EXIT_NO_FILE = 3
EXIT_PARSE = 4

# flags that affect scheduling only, never outputs
_UNRECORDED = {"jobs", "func"}


def _write_manifest(path: Path, command: str, args: argparse.Namespace, seed: int, outputs: list[str]) -> None:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in _UNRECORDED}
    manifest = {
        "command": command,
        "flags": flags,
        "master_seed": seed,
        "outputs": outputs,
        "tool_version": __version__,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _players(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 players, got {text}")
    return value


def _sizes(text: str) -> list[int]:
    try:
        return [_positive(part) for part in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from exc


def _probability(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return value


def cmd_gen(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.family == "balanced" and args.variant == "deterministic-base" and args.n < args.k:
        parser.error("deterministic-base balanced games need --n >= --k")
    if args.family != "balanced" and (args.pin_losing or args.variant is not None):
        parser.error("--pin-losing and --variant only apply to --family balanced")
    if args.family != "restricted" and args.move_prob is not None:
        parser.error("--move-prob only applies to --family restricted")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for index in range(args.count):
        rng = make_rng(args.seed, index)
        if args.family == "dense":
            game = gen_dense_uniform(args.n, args.k, rng)
        elif args.family == "restricted":
            game = gen_restricted(args.n, args.k, rng, 1.0 if args.move_prob is None else args.move_prob)
        else:
            cfg = GenConfig(
                args.n,
                args.k,
                variant=Variant(args.variant or "rejection"),
                pin_losing=args.pin_losing,
                edge_prob=args.edge_prob,
            )
            try:
                game, _ = gen_balanced(cfg, rng=rng)
            except GenerationError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_PRECONDITION
        if args.pin_losing and not classify(game).is_losing:
            raise AssertionError("pinned game is not losing")
        name = f"{args.family}_n{args.n}_k{args.k}_s{args.seed}_{index:04d}.subgame"
        (out_dir / name).write_text(serialize(game))
        outputs.append(name)
    _write_manifest(out_dir / "manifest.json", "gen", args, args.seed, outputs)
    print(f"wrote {len(outputs)} games to {out_dir}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    path = Path(args.game)
    try:
        text = path.read_text()
    except FileNotFoundError:
        print(f"error: game file not found: {path}", file=sys.stderr)
        return EXIT_NO_FILE
    try:
        game = parse(text)
    except ParseError as exc:
        print(f"error: cannot parse {path}: {exc}", file=sys.stderr)
        return EXIT_PARSE

    fn, needs_restricted = SOLVERS[args.solver]
    try:
        if needs_restricted:
            require_restricted(game)
        report = fn(CountingOracle(game), make_rng(args.seed))
    except PromiseViolation as exc:
        print(f"error: solver {args.solver} precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ValueError as exc:
        print(f"error: solver {args.solver} rejected the game: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    print(f"solver: {report.solver}")
    print(f"seed: {args.seed}")
    print(f"n: {game.n}")
    print(f"k: {game.k}")
    print(f"value: {report.value}")
    print(f"queries: {report.queries}")
    if args.full_vector and report.values is not None:
        print("values: " + " ".join(map(str, report.values)))
    correct = None
    if args.verify:
        truth = win_values(game)
        correct = report.value == truth[-1] if report.values is None else report.values == truth
        print(f"correct: {str(correct).lower()}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["game", "solver", "seed", "n", "k", "value", "queries", "correct"])
            w.writerow([
                str(path), args.solver, args.seed, game.n, game.k, report.value, report.queries,
                "" if correct is None else int(correct),
            ])
    return EXIT_OK


def _print_scaling(result) -> None:
    print(f"{'family':<11} {'solver':<19} {'n':>6} {'trials':>6} {'mean queries':>14} {'std':>11} {'correct':>7}")
    for (family, solver, n), (trials, mean, std, correct) in result.cells.items():
        print(f"{family:<11} {solver:<19} {n:>6} {trials:>6} {mean:>14.2f} {std:>11.2f} {correct:>7}")
    print()
    for (family, solver), fit in result.fits.items():
        print(f"slope {solver} ({family}): {fit.slope:.3f}  intercept {fit.intercept:.3f}  r2 {fit.r2:.5f}")


def cmd_bench(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    solvers = args.solvers.split(",")
    unknown = [s for s in solvers if s not in SOLVERS]
    if unknown:
        parser.error(f"unknown solver(s): {', '.join(unknown)}")
    try:
        result = run_scaling(args.sizes, args.trials, solvers, args.seed, args.family, args.k, args.jobs)
    except ValueError as exc:
        parser.error(str(exc))
    text = scaling_csv(result)
    outputs = []
    if args.csv:
        Path(args.csv).write_text(text)
        outputs.append(args.csv)
        _write_manifest(Path(args.csv + ".manifest.json"), "bench", args, args.seed, outputs)
    # the summary is rebuilt from the CSV text so it is recomputable from the file alone
    _print_scaling(summarize_scaling(read_scaling_csv(text)))
    return EXIT_OK


def cmd_sensitivity(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    min_n = {None: 1, 1: 1, 2: 2, 3: 2, 4: 3}[args.force_case]
    if args.n < min_n:
        parser.error(f"--force-case {args.force_case} needs --n >= {min_n}")
    if args.variant == "deterministic-base" and args.n < args.k:
        parser.error("deterministic-base variant needs --n >= --k")
    result = run_sensitivity(args.n, args.k, args.trials, args.seed, args.variant, args.force_case, args.jobs)
    text = sensitivity_csv(result)
    outputs = []
    if args.csv:
        Path(args.csv).write_text(text)
        outputs.append(args.csv)
        _write_manifest(Path(args.csv + ".manifest.json"), "sensitivity", args, args.seed, outputs)
    summary = summarize_sensitivity(read_sensitivity_csv(text), args.n, args.k)
    lo, hi = summary.ci
    print(f"trials: {summary.trials}")
    print(f"changed: {summary.changed}")
    print(f"p_hat: {summary.p_hat:.6f}  95% CI [{lo:.6f}, {hi:.6f}]")
    for case, (count, changed) in summary.per_case.items():
        clo, chi = wilson_interval(changed, count)
        print(f"case {case} ({CASES[case]}): {changed}/{count} = {changed / count:.6f}  95% CI [{clo:.6f}, {chi:.6f}]")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subgames", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate random games")
    gen.add_argument("--family", choices=["balanced", "restricted", "dense"], required=True)
    gen.add_argument("--n", type=_positive, required=True)
    gen.add_argument("--k", type=_players, default=3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--count", type=_positive, default=1)
    gen.add_argument("--out-dir", required=True)
    gen.add_argument("--variant", choices=[v.value for v in Variant])
    gen.add_argument("--pin-losing", action="store_true")
    gen.add_argument("--edge-prob", type=_probability, default=0.5)
    gen.add_argument("--move-prob", type=_probability)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="solve one .subgame file")
    solve.add_argument("--game", required=True)
    solve.add_argument("--solver", choices=list(SOLVERS), default="dp")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--full-vector", action="store_true")
    solve.add_argument("--verify", action="store_true", help="compare against the DP answer")
    solve.add_argument("--csv")
    solve.set_defaults(func=cmd_solve)

    bench = sub.add_parser("bench", help="query-count scaling benchmark")
    bench.add_argument("--sizes", type=_sizes, default=[64, 128, 256, 512, 1024])
    bench.add_argument("--trials", type=_positive, default=50)
    bench.add_argument("--solvers", default="dp,quantum,quantum-restricted")
    bench.add_argument("--family", choices=["dense", "balanced"], default="dense")
    bench.add_argument("--k", type=_players, default=3)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--csv")
    bench.add_argument("--jobs", type=_positive, default=os.cpu_count() or 1)
    bench.set_defaults(func=cmd_bench)

    sens = sub.add_parser("sensitivity", help="one-bit sensitivity of losing balanced games")
    sens.add_argument("--n", type=_positive, required=True)
    sens.add_argument("--k", type=_players, default=3)
    sens.add_argument("--trials", type=_positive, default=10_000)
    sens.add_argument("--seed", type=int, default=0)
    sens.add_argument("--variant", choices=[v.value for v in Variant], default="rejection")
    sens.add_argument("--force-case", type=int, choices=sorted(CASES))
    sens.add_argument("--csv")
    sens.add_argument("--jobs", type=_positive, default=os.cpu_count() or 1)
    sens.set_defaults(func=cmd_sensitivity)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
