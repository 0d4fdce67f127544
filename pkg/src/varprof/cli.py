"""Command-line entry point: ``varprof run|preset|list-presets``.

Exit codes: 0 success, 1 a check or invariant failed, 2 bad configuration
or unusable output directory.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from varprof import __version__
from varprof.config import load_config
from varprof.errors import ConfigError
from varprof.experiments import run
from varprof.presets import list_presets, load_preset

log = logging.getLogger("varprof")


def _execute(cfg, out) -> int:
    out = Path(out if out is not None else (cfg.out or Path("results") / cfg.name))
    try:
        res = run(cfg, out)
    except OSError as exc:
        print(f"error: cannot write outputs to {out}: {exc}", file=sys.stderr)
        return 2
    for f in res.failures:
        print(f"FAIL {f}", file=sys.stderr)
    print(f"{cfg.name}: {'ok' if res.status == 0 else 'FAILED'} ({len(res.files)} files in {out}, "
          f"config {cfg.hash})")
    return res.status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="varprof", description="Trace statistics of random matrices "
                                "with a variance profile: simulations, bounds and diagnostics.")
    p.add_argument("--version", action="version", version=f"varprof {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment described by a config file")
    r.add_argument("config", type=Path)
    r.add_argument("--out", type=Path, help="output directory (default: [experiment] out or results/<name>)")

    pr = sub.add_parser("preset", help="run a named preset")
    pr.add_argument("name")
    pr.add_argument("--n", type=int)
    pr.add_argument("--seed", type=int)
    pr.add_argument("--replicas", type=int)
    pr.add_argument("--out", type=Path)

    sub.add_parser("list-presets", help="list preset names")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "list-presets":
        for name, desc in list_presets():
            print(f"{name:28s} {desc}")
        return 0
    try:
        if args.command == "run":
            cfg = load_config(args.config)
        else:
            cfg = load_preset(args.name, n=args.n, seed=args.seed, replicas=args.replicas)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return _execute(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
