"""``regret-forge`` command line."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import bench
from .exceptions import UnknownGameError, UnknownVariantError
from .games import SUPPORTED, game_stats, make_game, sequence_form
from .solver import solve

VARIANTS = ("cfr", "cfrplus", "linear", "dcfr", "dcfrplus", "pcfrplus", "pdcfrplus")
LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
STATS_COLUMNS = ("histories", "infosets", "terminals", "depth", "max_infoset_size")


def _setup_logging():
    level = LEVELS.get(os.environ.get("REGRET_FORGE_LOG", "error").lower(), logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regret-forge", description="CFR variants on benchmark games.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one variant on one game and write a CSV trace")
    p.add_argument("--game", required=True, help=f"one of: {', '.join(SUPPORTED)}")
    p.add_argument("--variant", required=True, choices=VARIANTS + ("wcfrplus", "pwcfrplus"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--iterations", type=int, required=True)
    p.add_argument("--eval-interval", type=int, default=bench.DEFAULT_EVAL_INTERVAL)
    p.add_argument("--out", required=True)
    p.add_argument("--dump-regrets", metavar="PATH", help="write final cumulative regrets as JSON")
    p.add_argument("--timing", action="store_true", help="fill elapsed_ms (makes the CSV run-dependent)")

    g = sub.add_parser("grid", help="run every stanza of a spec file")
    g.add_argument("--specs", required=True)
    g.add_argument("--out-dir", required=True)
    g.add_argument("--jobs", type=int, default=1)

    pl = sub.add_parser("plot", help="log-scale exploitability plot of CSV traces")
    pl.add_argument("--out", required=True)
    pl.add_argument("csv", nargs="+")

    s = sub.add_parser("stats", help="print game sizes")
    s.add_argument("--game", required=True, action="append")
    return parser


def _dump_regrets(result, path):
    data = {"iterations": result.state.t, "players": {}}
    for index, ps in enumerate(result.state.players, start=1):
        nodes = {}
        for node in ps.sdp.nodes[1:]:
            block = ps.R[node.first_seq : node.first_seq + node.n]
            nodes[repr(node.key)] = dict(zip(node.actions, block.tolist()))
        data["players"][str(index)] = nodes
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)


def _solve(args) -> int:
    if args.iterations < 1 or args.eval_interval < 1:
        print("error: --iterations and --eval-interval must be positive", file=sys.stderr)
        return 2
    spec = bench.ExperimentSpec(
        game=args.game,
        variant=args.variant,
        iterations=args.iterations,
        out=args.out,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        eval_interval=args.eval_interval,
        timing=args.timing,
    )
    try:
        config = spec.config()
        game = sequence_form(make_game(args.game))
    except (UnknownGameError, UnknownVariantError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = solve(game, config)
    try:
        bench.write_csv(result.records, args.out)
        if args.dump_regrets:
            _dump_regrets(result, args.dump_regrets)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


def _grid(args) -> int:
    try:
        results = bench.grid(args.specs, args.out_dir, args.jobs)
    except (OSError, bench.SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not results:
        print(f"warning: {args.specs} holds no experiments", file=sys.stderr)
    failed = [(out, err) for out, err in results if err]
    for out, err in failed:
        print(f"error: {out}: {err}", file=sys.stderr)
    return 1 if failed else 0


def _plot(args) -> int:
    try:
        bench.plot(args.csv, args.out)
    except (OSError, bench.SpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _stats(args) -> int:
    print("\t".join(("game",) + STATS_COLUMNS))
    for name in args.game:
        try:
            row = game_stats(make_game(name)).table_row()
        except (UnknownGameError, ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print("\t".join([name] + [str(v) for v in row]))
    return 0


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return {"solve": _solve, "grid": _grid, "plot": _plot, "stats": _stats}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
