#!/usr/bin/env python3
"""Settling-time scaling with problem size.

Holds the total relaxation rate per mode fixed while the coupling weight is
redistributed over n input reservoirs, then reports the time to reach a
relative deviation of rel_tol from the stationary state. The point of the
experiment: the settling time is set by the total rate, not by n.
"""

import argparse

import numpy as np

from thermoflow import dynamics, physics
from thermoflow.physics import DeviceConfig, Mode, Reservoir


def sweep_config(n: int, drain_ratio: float) -> DeviceConfig:
    row = np.empty((1, n + 1))
    row[0, 1:] = (1.0 / (1.0 + drain_ratio)) / n
    row[0, 0] = 1.0 - row[0, 1:].sum()
    reservoirs = (Reservoir(physics.T_FLOOR, is_drain=True),) + tuple(
        Reservoir(physics.inverse_temperature(1.0, 1.0)) for _ in range(n)
    )
    return DeviceConfig(modes=(Mode(1.0),), reservoirs=reservoirs, couplings=row)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rel-tol", type=float, default=1e-6)
    parser.add_argument("--drain-ratio", type=float, default=1e-4)
    parser.add_argument("--max-n", type=int, default=64)
    args = parser.parse_args()

    print(f"{'n':>4} {'settling_time':>16} {'window':>12}")
    times = []
    n = 2
    while n <= args.max_n:
        config = sweep_config(n, args.drain_ratio)
        t = dynamics.settling_time(config, np.zeros(1), args.rel_tol)
        times.append(t)
        print(f"{n:>4} {t:>16.9f} {dynamics.stationary_window(config):>12.3f}")
        n *= 2
    spread = (max(times) - min(times)) / max(times)
    print(f"relative spread across sizes: {spread:.3e}")


if __name__ == "__main__":
    main()
