"""Anatomy of a ladder time.

A positive-drift (2-2) walk started at 0 eventually climbs above its
starting level for the first time, at the ladder time T1.  Everything the
walk does before that moment is a stack of down-excursions, and counting
those excursions by type (nine of them, three per entry mechanism) turns
the ladder time into a branching process whose mean we can write down.

This script simulates a million ladder epochs, decomposes a few of the
paths step by step, and checks the analytic E[T1] against the sample mean.

Run:  python demos/ladder_time_anatomy.py
"""
import numpy as np

from ladderwalk import (Environment, SiteLaw, TIME_WEIGHTS, decompose,
                        expected_t1, expected_tally, local_drift,
                        run_ensemble, run_to_ladder, verify_identity)

LAW = SiteLaw(q2=0.08, q1=0.36, p1=0.21, p2=0.35)
ENV = Environment.homogeneous(LAW)
TYPES = ("A1", "A2", "A3", "B1", "B2", "B3", "C1", "C2", "C3")


def main():
    print(f"site law: {LAW}")
    print(f"local drift: {local_drift(LAW):+.4f}\n")

    # --- one path, dissected -------------------------------------------
    path = run_to_ladder(ENV, seed=2024, replica=39)
    dec = decompose(path)
    print(f"sample path: T1 = {dec.t1} steps, "
          f"exits at X = {path.positions[-1]}")
    print(f"first move up was a type-{dec.u1_subtype()} immigrant")
    for level in sorted(dec.tallies, reverse=True):
        counts = dec.tallies[level].counts
        shown = ", ".join(f"{t}={c}" for t, c in zip(TYPES, counts) if c)
        print(f"  level {level:+d}: {shown or '(empty)'}")
    report = verify_identity(dec, path)
    print(f"step-count identity holds: {report.ok}\n")

    # --- the law of large numbers --------------------------------------
    analytic = expected_t1(ENV)
    stats = run_ensemble(ENV, master_seed=7, replicas=1_000_000, workers=4)
    z = (stats.t1_mean - analytic.value) / stats.t1_se
    print(f"analytic  E[T1] = {analytic.value:.6f}")
    print(f"simulated E[T1] = {stats.t1_mean:.6f} "
          f"+/- {stats.t1_se:.6f}  (z = {z:+.2f})\n")

    # --- expected excursion counts, level by level ----------------------
    print("expected excursions per level (weighted rows sum to E[T1]-1):")
    total = 1.0
    for level in range(0, -6, -1):
        tally = expected_tally(ENV, level)
        total += float(tally @ np.array(TIME_WEIGHTS))
        top = ", ".join(f"{t}={v:.4f}" for t, v
                        in zip(TYPES, tally) if v > 1e-4)
        print(f"  level {level:+d}: {top}")
    print(f"partial sum through level -5: {total:.6f} -> E[T1]")


if __name__ == "__main__":
    main()
