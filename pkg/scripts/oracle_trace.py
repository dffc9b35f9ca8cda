"""Replay small sessions on the dense simulator and report the worst overlap.

Useful after touching ``qotlab.registers``: any divergence between the
branched and dense representations shows up as a fidelity below one.
"""

import argparse

from qotlab.acceptance import oracle_sessions


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sessions", type=int, default=48)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    for config, strategy, res in oracle_sessions(args.sessions, seed=args.seed):
        worst = min(res.oracle_fidelities)
        gap = max(res.oracle_prob_gaps, default=0.0)
        print(f"n={config.n} {config.ancillas:7s} {config.variant.value:4s} {config.bc_mode.value:8s} "
              f"{strategy.value:14s} steps={len(res.oracle_fidelities):4d} 1-F={1 - worst:.1e} gap={gap:.1e}")


if __name__ == "__main__":
    main()
