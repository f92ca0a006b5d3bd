#!/usr/bin/env python3
"""Sweep encoder accuracy against the direct linear-algebra result.

For a grid of drain ratios and group tolerances, run randomized stochastic
matrix-vector products through the full encode/flows/decode pipeline and
report the realized relative error versus the reported error bound.
"""

import argparse

import numpy as np

from thermoflow import compiler


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cases", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-size", type=int, default=16)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    problems = []
    for _ in range(args.cases):
        m = int(rng.integers(1, args.max_size + 1))
        n = int(rng.integers(1, args.max_size + 1))
        p = rng.uniform(0.05, 1.0, (m, n))
        p /= p.sum(axis=1, keepdims=True)
        b = rng.uniform(1e-6, 10.0, n)
        problems.append((p, b))

    print(f"{'drain_ratio':>12} {'group_tol':>10} {'median_rel':>12} "
          f"{'max_rel':>12} {'bound_ok':>8}")
    for drain_ratio in (1e-3, 1e-4, 1e-5):
        for group_tol in (1e-2, 1e-3, 1e-4):
            rel = []
            bound_ok = 0
            for p, b in problems:
                result = compiler.run_matvec(
                    p, b, drain_ratio=drain_ratio, group_tol=group_tol
                )
                exact = p @ b
                err = np.abs(result.values - exact)
                rel.append(float(np.max(err / np.abs(exact))))
                bound_ok += int(np.all(err <= result.error_bound))
            print(
                f"{drain_ratio:>12.0e} {group_tol:>10.0e} "
                f"{np.median(rel):>12.3e} {max(rel):>12.3e} "
                f"{bound_ok:>5}/{len(problems)}"
            )


if __name__ == "__main__":
    main()
