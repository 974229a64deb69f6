"""Command line front end.

    colgen run --problem ga --generate bins=200,items=10,count=5 \
        --strategies baseline,exact-all,heur-add --audit --format md
    colgen run --problem mc --instances 'data/*.txt' --strategies exact-all
    colgen generate --problem ga --bins 100 --items 10 --count 10 --out-dir data/

Exit status: 0 on success, 1 when any run failed or an audit check was
violated, 2 on bad arguments or unreadable instances.
"""

from __future__ import annotations

import argparse
import glob
import pathlib
import sys

from .assignment import generate_ga_instance, parse_ga_instance, write_ga_instance
from .experiments import (STRATEGIES, ExperimentConfig, emit_report, run_experiment)
from .mcflow import generate_mc_instance, parse_mc_instance, write_mc_instance


def _parse_alpha(text: str):
    if text in ("inf", "none", "all"):
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("alpha must be at least 1 (or 'inf')")
    return value


def _parse_strategies(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    unknown = [s for s in names if s not in STRATEGIES]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown strategies {', '.join(unknown)}; "
            f"choose from {', '.join(STRATEGIES)}")
    return names


def _parse_genspec(text: str) -> dict[str, int]:
    params = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"bad generator key=value pair {part!r}")
        params[key.strip()] = int(value)
    return params


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colgen",
                                     description="column generation with pricing filtering")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve instances under one or more strategies")
    run.add_argument("--problem", choices=("mc", "ga"), required=True)
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--instances", help="glob of instance files")
    source.add_argument("--generate", type=_parse_genspec, metavar="K=V,...",
                        help="generate instances instead of loading "
                             "(ga: bins,items,count,seed; mc: nodes,arcs,commodities,count,seed)")
    run.add_argument("--strategies", type=_parse_strategies, default=("baseline",),
                     help="comma-separated subset of: " + ", ".join(STRATEGIES))
    run.add_argument("--epsilon", type=float, default=1e-4)
    run.add_argument("--alpha", type=_parse_alpha, default=None,
                     help="keep only the last N dual vectors (default: keep all)")
    run.add_argument("--seed", type=int, default=0, help="base seed for --generate")
    run.add_argument("--audit", action="store_true",
                     help="re-price every filtered block and cross-check reduced costs")
    run.add_argument("--format", choices=("csv", "md"), default="csv")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--jobs", type=int, default=1,
                     help="instances solved in parallel (disables r_time)")
    run.add_argument("--max-iterations", type=int, default=10_000)

    gen = sub.add_parser("generate", help="write instance files")
    gen.add_argument("--problem", choices=("mc", "ga"), required=True)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-dir", required=True)
    gen.add_argument("--bins", type=int)
    gen.add_argument("--items", type=int)
    gen.add_argument("--nodes", type=int)
    gen.add_argument("--arcs", type=int)
    gen.add_argument("--commodities", type=int)
    return parser


def _generate_batch(problem: str, params: dict[str, int], default_seed: int):
    count = params.pop("count", 1)
    seed = params.pop("seed", default_seed)
    instances = []
    if problem == "ga":
        extra = set(params) - {"bins", "items"}
        if extra or "bins" not in params or "items" not in params:
            raise ValueError("ga generator needs bins=..,items=.. (plus count=, seed=)")
        for i in range(count):
            inst = generate_ga_instance(params["bins"], params["items"], seed + i)
            instances.append((f"ga-s{seed + i}", inst))
    else:
        extra = set(params) - {"nodes", "arcs", "commodities"}
        if extra or set(params) != {"nodes", "arcs", "commodities"}:
            raise ValueError("mc generator needs nodes=..,arcs=..,commodities=.. "
                             "(plus count=, seed=)")
        for i in range(count):
            inst = generate_mc_instance(params["nodes"], params["arcs"],
                                        params["commodities"], seed + i)
            instances.append((f"mc-s{seed + i}", inst))
    return instances


def _load_batch(problem: str, pattern: str):
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise ValueError(f"no instance files match {pattern!r}")
    parse = parse_mc_instance if problem == "mc" else parse_ga_instance
    instances = []
    for path in paths:
        text = pathlib.Path(path).read_text()
        try:
            instances.append((pathlib.Path(path).stem, parse(text)))
        except Exception as exc:
            raise ValueError(f"{path}: {exc}") from exc
    return instances


def _cmd_run(args) -> int:
    try:
        if args.generate is not None:
            instances = _generate_batch(args.problem, dict(args.generate), args.seed)
        else:
            instances = _load_batch(args.problem, args.instances)
        config = ExperimentConfig(problem=args.problem, strategies=args.strategies,
                                  epsilon=args.epsilon, retain_duals=args.alpha,
                                  audit=args.audit, jobs=args.jobs,
                                  max_iterations=args.max_iterations)
    except ValueError as exc:
        print(f"colgen: {exc}", file=sys.stderr)
        return 2
    report = run_experiment(config, instances)
    text = emit_report(report.rows, args.format)
    if args.out:
        pathlib.Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    for failure in report.failures:
        print(f"colgen: FAILED {failure.instance}/{failure.strategy}: {failure.error}",
              file=sys.stderr)
    for violation in report.audit_violations:
        print(f"colgen: AUDIT {violation}", file=sys.stderr)
    return 0 if report.ok else 1


def _cmd_generate(args) -> int:
    if args.problem == "ga":
        if args.bins is None or args.items is None:
            print("colgen: generate --problem ga needs --bins and --items", file=sys.stderr)
            return 2
    elif args.nodes is None or args.arcs is None or args.commodities is None:
        print("colgen: generate --problem mc needs --nodes, --arcs and --commodities",
              file=sys.stderr)
        return 2
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        if args.problem == "ga":
            text = write_ga_instance(generate_ga_instance(args.bins, args.items, seed))
        else:
            text = write_mc_instance(generate_mc_instance(args.nodes, args.arcs,
                                                          args.commodities, seed))
        path = out_dir / f"{args.problem}_s{seed}.txt"
        path.write_text(text)
        print(path)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_generate(args)


def console_entry():
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
