"""Command-line entry point: ``polqkd run | table | verify``.

Exit codes: 0 success, 1 invariant or QBER-contract failure, 2 config error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .checks import MUTATIONS, TABLE_THETAS, emit_transform_table, format_report, run_checks
from .config import FIELDS, ConfigError, build_config, read_config_file
from .session import EmptyKeyError, run_session

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def _flag(key: str) -> str:
    name = key[len("session."):] if key.startswith("session.") else key
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polqkd",
                                description="Polarization-tracking QKD simulator.")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="Run one key-distribution session.")
    r.add_argument("--config", help="session config file (INI with dotted sections)")
    r.add_argument("--output-dir", default=".", help="where pulses.csv and summary.json go")
    r.add_argument("--workers", type=int, default=1, help="threads for pulse simulation")
    r.add_argument("--max-qber", type=float, default=None,
                   help="exit with status 1 if the measured QBER exceeds this")
    overrides = r.add_argument_group("config overrides")
    for key, help_text in FIELDS.items():
        overrides.add_argument(_flag(key), dest=key, default=argparse.SUPPRESS,
                               metavar="VALUE", help=f"{help_text} [{key}]")

    t = sub.add_parser("table", help="Print the six-state transform table.")
    t.add_argument("--theta", type=float, nargs="+", default=list(TABLE_THETAS),
                   help="channel angles (rad) to sample")

    v = sub.add_parser("verify", help="Run the invariant checks.")
    v.add_argument("--seed", type=int, default=2024)
    v.add_argument("--samples", type=int, default=100, help="random angles per check")
    v.add_argument("--mutate", choices=sorted(MUTATIONS), default=None,
                   help="inject a known defect (negative control); checks should fail")
    return p


def _run(args) -> int:
    overrides = {k: str(getattr(args, k)) for k in FIELDS if hasattr(args, k)}
    try:
        flat = read_config_file(args.config) if args.config else {}
        flat.update(overrides)
        cfg = build_config(flat)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run_session(cfg, workers=args.workers)
    except EmptyKeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    pulses, summary = result.write(args.output_dir)
    rate_name = "sift rate" if cfg.protocol.value == "BB84" else "conclusive rate"
    print(f"{cfg.protocol} / {cfg.tracking} / {cfg.effective_receiver_table}: "
          f"{cfg.pulses} pulses, {result.alice_sifted.size} sifted bits")
    print(f"{rate_name}: {result.sift_rate:.6f}")
    print(f"qber: {result.qber:.6f}")
    for name, stats in result.qber_per_basis.items():
        print(f"  {name}: qber {stats['qber']:.6f} over {stats['sifted']} bits")
    print(f"wrote {pulses} and {summary}")
    if args.max_qber is not None and result.qber > args.max_qber:
        print(f"qber {result.qber} exceeds --max-qber {args.max_qber}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "run":
        return _run(args)
    if args.cmd == "table":
        print(emit_transform_table(tuple(args.theta)))
        return EXIT_OK
    results = run_checks(seed=args.seed, n=args.samples, mutation=args.mutate)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
