"""Command-line entry points: run Monte Carlo sweeps or just validate a config.

Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .harness import ConfigError, config_digest, emit_csv, load_config, resolved_text, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmwtrack")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the configured Monte Carlo experiment")
    sim.add_argument("--config", required=True, help="path to the experiment config")
    sim.add_argument("--out", required=True, help="output directory for CSV files")
    sim.add_argument("--threads", type=int, default=1, help="worker pool width")
    sim.add_argument("--seed", type=int, default=None, help="override the master seed")

    val = sub.add_parser("validate", help="parse and validate a config, then exit")
    val.add_argument("--config", required=True, help="path to the experiment config")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "simulate" and args.seed is not None:
            text = resolved_text(cfg)
            text = "".join(
                f"master_seed = {args.seed}\n" if line.startswith("master_seed ") else line + "\n"
                for line in text.splitlines()
            )
            cfg = load_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"config OK (digest {config_digest(cfg)})")
        return 0

    try:
        records = run_experiment(cfg, workers=max(1, args.threads))
        emit_csv(records, args.out)
        with open(os.path.join(args.out, "config_resolved.txt"), "w", encoding="utf-8") as fh:
            fh.write(resolved_text(cfg))
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(records)} records to {args.out} (digest {config_digest(cfg)})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
