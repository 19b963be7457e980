"""Command line front end.

Exit codes: 0 success, 2 configuration error, 3 I/O or parse error,
4 empty data.
"""

from __future__ import annotations

import argparse
import sys

from .errors import (ConfigurationError, DataError, EmptyDataError,
                     ParseError, StatisticsError, WebnavError)
from .run import (RunManifest, build_config, compare_runs, format_comparison,
                  parse_config_file, run_ingest, run_simulation)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_EMPTY = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="webnav",
        description="Simulate Web navigation models and analyze traffic logs.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a navigation model")
    sim.add_argument("--config", help="flat key = value config file")
    sim.add_argument("--model", choices=["pagerank", "bookrank", "abc"])
    sim.add_argument("--n", help="nodes in the generated graph")
    sim.add_argument("--m", help="links added per new node")
    sim.add_argument("--gamma", help="target degree exponent")
    sim.add_argument("--graph", help="edge-list file instead of generating")
    sim.add_argument("--symmetrize", action="store_const", const=True,
                     help="insert reverse edges when loading --graph")
    sim.add_argument("--pt", help="teleport probability")
    sim.add_argument("--beta", help="bookmark rank exponent")
    sim.add_argument("--pb", help="back-button probability")
    sim.add_argument("--e0", help="session-start energy")
    sim.add_argument("--cf", help="forward click cost")
    sim.add_argument("--cb", help="back click cost")
    sim.add_argument("--eta", help="topical locality half-width")
    sim.add_argument("--delta0", help="session-root relevance")
    sim.add_argument("--agents", help="number of agents")
    sim.add_argument("--sessions", help="sessions per agent")
    sim.add_argument("--sessions-file", dest="sessions_file",
                     help="file with one per-agent session quota per line")
    sim.add_argument("--seed", help="master RNG seed")
    sim.add_argument("--workers", help="worker process count")
    sim.add_argument("--out", help="output directory")
    sim.add_argument("--export-log", dest="export_log", action="store_const",
                     const=True, help="write the clicks as a synthetic request log")

    ing = sub.add_parser("ingest", help="rebuild sessions from a request log")
    ing.add_argument("log", help="TSV request log (timestamp, user, referrer, target)")
    ing.add_argument("--out", required=True, help="output directory")
    ing.add_argument("--timeout", type=float, default=1800.0,
                     help="session inactivity timeout in seconds")
    ing.add_argument("--strip-query", action="store_true",
                     help="drop ?query suffixes from URLs")
    ing.add_argument("--extensions",
                     help="comma-separated page extension allowlist")

    cmp_ = sub.add_parser("compare", help="compare two run manifests")
    cmp_.add_argument("manifest_a")
    cmp_.add_argument("manifest_b")
    return parser


_SIM_OPTION_KEYS = ("model", "n", "m", "gamma", "graph", "symmetrize", "pt",
                    "beta", "pb", "e0", "cf", "cb", "eta", "delta0", "agents",
                    "sessions", "sessions_file", "seed", "workers", "out",
                    "export_log")


def _cmd_simulate(args) -> int:
    options = {}
    if args.config:
        options.update(parse_config_file(args.config))
    for key in _SIM_OPTION_KEYS:
        value = getattr(args, key)
        if value is not None:
            options[key] = value
    config = build_config(options)
    manifest = run_simulation(config)
    print(f"wrote {manifest.path}")
    print(f"sessions={manifest['total_sessions']} clicks={manifest['total_clicks']} "
          f"mean_size={manifest['mean_session_size']}")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    extensions = None
    if args.extensions:
        extensions = [e for e in args.extensions.split(",") if e]
    manifest = run_ingest(args.log, args.out, timeout=args.timeout,
                          strip_query=args.strip_query,
                          page_extensions=extensions)
    print(f"wrote {manifest.path}")
    print(f"users={manifest['n_users']} sessions={manifest['total_sessions']} "
          f"mean_size={manifest['mean_session_size']}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    a = RunManifest.load(args.manifest_a)
    b = RunManifest.load(args.manifest_b)
    rows = compare_runs(a, b)
    print(format_comparison(rows, args.manifest_a, args.manifest_b))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "ingest":
            return _cmd_ingest(args)
        return _cmd_compare(args)
    except EmptyDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (ConfigurationError, StatisticsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except WebnavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
