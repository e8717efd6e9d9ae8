"""Exit probabilities three ways.

Where does a (2-2) walk leave an interval?  Because the walk can jump two
sites, it exits the top of [a+1, b-1] at either b or b+1, and the split
between those two landing sites is exactly what the transfer-matrix
construction computes.  This script compares three routes for a periodic
environment:

  1. the transfer-matrix table (exact integer arithmetic at this width),
  2. the dense absorbing-chain linear solve,
  3. brute-force Monte Carlo.

and then pushes the interval bottom to -400 to show the finite-interval
probabilities converging to the infinite-interval hitting law.

Run:  python demos/exit_probabilities_vs_oracle.py
"""
import numpy as np

from ladderwalk import (Environment, SiteLaw, exit_probabilities,
                        hit_from_below, solve_exit_table)

ENV = Environment.periodic([
    SiteLaw(q2=0.08, q1=0.36, p1=0.21, p2=0.35),
    SiteLaw(q2=0.19, q1=0.30, p1=0.30, p2=0.21),
])


def monte_carlo(env, a, b, start, n, seed):
    """Empirical exit split by direct simulation of n walks."""
    rng = np.random.default_rng(seed)
    jumps = np.array([-2, -1, 1, 2])
    hits = {a - 1: 0, a: 0, b: 0, b + 1: 0}
    for _ in range(n):
        x = start
        while a < x < b:
            x += rng.choice(jumps, p=env.law_at(x).as_array())
        hits[x] += 1
    return {k: v / n for k, v in hits.items()}


def main():
    a, b, start = -12, 1, 0
    table = exit_probabilities(ENV, a, b)
    oracle = solve_exit_table(ENV, a, b)
    j = list(oracle["starts"]).index(start)
    mc = monte_carlo(ENV, a, b, start, n=200_000, seed=99)

    print(f"interval [{a + 1}, {b - 1}], start {start} "
          f"(exact arithmetic: {table.exact})")
    print(f"{'target':>8} {'transfer':>12} {'oracle':>12} {'monte carlo':>12}")
    for target in (b, b + 1):
        print(f"{target:>8} {table.prob(start, target):>12.8f} "
              f"{oracle[target][j]:>12.8f} {mc[target]:>12.8f}")
    print()

    # deepen the interval: the top-exit split converges geometrically to
    # the infinite-depth hitting law
    prof = hit_from_below(ENV, start, 0)
    print(f"infinite-depth hitting law: f1 = {prof.f1:.12f}, "
          f"f2 = {prof.f2:.12f}")
    print(f"{'bottom a':>10} {'P(exit at 1)':>16} {'|diff from f1|':>16}")
    for a in (-6, -12, -25, -50, -100, -400):
        t = exit_probabilities(ENV, a, b)
        p1 = t.prob(start, b)
        print(f"{a:>10} {p1:>16.12f} {abs(p1 - prof.f1):>16.2e}")


if __name__ == "__main__":
    main()
