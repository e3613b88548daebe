"""Run every adversary mode across a batch of seeds and tabulate results.

Usage: python scripts/adversary_sweep.py [runs-per-mode] [--toy]

Each run must provoke the mode's documented rejection reason without
mutating chain state; the two recoverable modes must still finalize.

With --toy the sweep runs in the 11-element test group, where proofs
have soundness error 1/11: expect roughly one forged finalize in
eleven to slip through.  That is the point of the demonstration; the
production group pushes the same probability to about 2^-256.
"""

import sys
import time

from pscsim import RunConfig, run_experiment
from pscsim.harness import ADVERSARY_MODES, EXPECTED_REJECTION


def config_for(mode: str, seed: int, group_name: str) -> RunConfig:
    import random

    rng = random.Random(seed * 1009 + 7)
    if group_name == "toy-insecure":
        ell, n = 1, rng.randint(2, 4)
    else:
        ell, n = rng.choice((4, 8)), rng.randint(2, 5)
    if mode == "bad-contract":
        values = tuple(rng.randrange((1 << ell) - 1) for _ in range(n))
        return RunConfig(values=values, contract="bad", ell=ell,
                         group_name=group_name, seed=seed, adversary=mode)
    values = tuple(rng.randrange(1 << ell) for _ in range(n))
    return RunConfig(values=values, contract="identity", ell=ell,
                     group_name=group_name, seed=seed, adversary=mode)


def main():
    args = [a for a in sys.argv[1:]]
    group_name = "toy-insecure" if "--toy" in args else "production"
    args = [a for a in args if a != "--toy"]
    runs = int(args[0]) if args else 20

    modes = [m for m in ADVERSARY_MODES if m != "none"]
    print(f"{runs} runs per mode, group {group_name}")
    print(f"{'mode':<20} {'rejected':>9} {'state ok':>9} {'verdict':>8}  reason")
    overall = True
    for mode in modes:
        t0 = time.perf_counter()
        seen = state_ok = verdict_ok = 0
        for i in range(runs):
            report = run_experiment(config_for(mode, i, group_name)).report
            seen += bool(report.expected_rejection_seen)
            state_ok += bool(report.rejection_state_intact)
            verdict_ok += report.ok
        kind, reason = EXPECTED_REJECTION[mode]
        line_ok = seen == state_ok == verdict_ok == runs
        overall &= line_ok
        print(
            f"{mode:<20} {seen:>6}/{runs:<3} {state_ok:>6}/{runs:<3} "
            f"{verdict_ok:>5}/{runs:<3}  {kind}:{reason} "
            f"({time.perf_counter() - t0:.1f}s)"
        )
    print("sweep", "clean" if overall else "HAS FAILURES")
    return 0 if overall else 1


if __name__ == "__main__":
    sys.exit(main())
