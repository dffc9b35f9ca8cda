"""Entangling-Bob success rate as a function of the number of qubits.

The attack does not depend on ``n`` beyond making the partition feasible,
so every row should sit near (2+√3)/4 with the BCCC row near 3/4.
"""

import argparse

from qotlab.adversary import RELIABILITY
from qotlab.commitment import BcMode
from qotlab.harness import make_scenario, run_scenario


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ns", type=int, nargs="+", default=[8, 12, 16, 25, 40])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args(argv)

    print(f"{'n':>4} {'mode':>9} {'match':>7} {'wilson95':>17} {'restarts':>9}")
    for n in args.ns:
        for mode in BcMode:
            s = run_scenario(make_scenario("cheat-aon", n=n, trials=args.trials, bc_mode=mode), args.seed)
            lo, hi = s.wilson95
            print(f"{n:>4} {mode.value:>9} {s.match_rate:7.4f}  [{lo:.4f}, {hi:.4f}] "
                  f"{s.metrics['restart_rate']:9.3f}")
    print(f"reference {RELIABILITY:.6f} (non-BCCC), 0.75 (BCCC)")


if __name__ == "__main__":
    main()
