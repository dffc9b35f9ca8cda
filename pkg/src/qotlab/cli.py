"""Command line entry point: ``qotlab run`` and ``qotlab verify``."""

from __future__ import annotations

import argparse
import sys

from qotlab.commitment import BcMode
from qotlab.harness import SCENARIOS, SessionFailure, emit_report, make_scenario, render_report, run_scenario
from qotlab.protocol import Variant


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qotlab", description="Simulate commitment-based quantum oblivious transfer.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write a report")
    run.add_argument("--scenario", required=True, choices=SCENARIOS)
    run.add_argument("--n", type=_positive, default=25, help="qubits per session (default 25)")
    run.add_argument("--trials", type=_positive, default=None, help="sessions (default: scenario preset)")
    run.add_argument("--seed", type=_u64, default=0)
    run.add_argument("--bc-mode", choices=[m.value for m in BcMode], default=None,
                     help="override the scenario's commitment mode")
    run.add_argument("--variant", choices=[v.value for v in Variant], default=None,
                     help="override the scenario's protocol variant")
    run.add_argument("--out", default=None, help="output path (default: stdout)")
    run.add_argument("--format", choices=["json", "csv"], default="json")

    sub.add_parser("verify", help="run every acceptance criterion; exit 1 if any fails")
    return p


def _run(args) -> int:
    try:
        sc = make_scenario(
            args.scenario,
            n=args.n,
            trials=args.trials,
            bc_mode=BcMode(args.bc_mode) if args.bc_mode else None,
            variant=Variant(args.variant) if args.variant else None,
        )
    except ValueError as exc:
        print(f"qotlab: {exc}", file=sys.stderr)
        return 2
    try:
        summary = run_scenario(sc, args.seed)
    except SessionFailure as exc:
        print(f"qotlab: {exc}", file=sys.stderr)
        return 3
    if args.out:
        try:
            emit_report([summary], args.format, args.out)
        except OSError as exc:
            print(f"qotlab: cannot write {args.out}: {exc}", file=sys.stderr)
            return 4
    else:
        sys.stdout.write(render_report([summary], args.format))
    return 0


def _verify() -> int:
    from qotlab.acceptance import run_all

    results = run_all(echo=lambda line: print(line, flush=True))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _run(args)
    return _verify()


if __name__ == "__main__":
    sys.exit(main())
