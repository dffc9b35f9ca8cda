"""Run every scenario preset and write one combined report.

    python3 scripts/sweep_scenarios.py --trials 2000 --out sweep.csv --format csv
"""

import argparse
import sys
import time

from qotlab.harness import SCENARIOS, DEFAULT_TRIALS, emit_report, make_scenario, render_report, run_scenario


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--trials", type=int, default=None, help="sessions per scenario (default: preset)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--scenarios", nargs="*", default=list(SCENARIOS), choices=SCENARIOS)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.add_argument("--out", default=None)
    args = p.parse_args(argv)

    summaries = []
    for name in args.scenarios:
        trials = args.trials if args.trials and name != "lo-ideal" else DEFAULT_TRIALS[name]
        t0 = time.perf_counter()
        s = run_scenario(make_scenario(name, n=args.n, trials=trials), args.seed)
        print(f"{name:16s} match {s.match_rate:.4f}  abort {s.abort_rate:.4f}  "
              f"ref {s.analytic_reference}  ({time.perf_counter() - t0:.1f}s)", file=sys.stderr)
        summaries.append(s)
    if args.out:
        emit_report(summaries, args.format, args.out)
    else:
        sys.stdout.write(render_report(summaries, args.format))


if __name__ == "__main__":
    main()
