#!/usr/bin/env python3
"""Tabulate semiclassical residuals of the midpoint-kernel quantization.

For a fixed pair of band-limited circle symbols, prints the deviation of
Op(f)Op(g) from Op(fg), of the symmetrized product from Op(fg), and of
the scaled commutator from Op({f,g}), along a decreasing hbar ladder.
"""

import argparse

from weylred.fiber import SphereFiber
from weylred.sweep import default_sweep_pair, semiclassical_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=384)
    parser.add_argument(
        "--hbar", type=float, nargs="+", default=[0.5, 0.25, 0.125, 0.0625]
    )
    args = parser.parse_args()

    f, g = default_sweep_pair()
    fiber = SphereFiber.circle(1.0, args.nodes)
    rows = semiclassical_sweep(f, g, args.hbar, fiber)
    print(f"{'hbar':>8} {'product':>12} {'jordan':>12} {'commutator':>12}")
    for row in rows:
        print(
            f"{row['hbar']:>8.4f} {row['product']:>12.5e}"
            f" {row['jordan']:>12.5e} {row['commutator']:>12.5e}"
        )


if __name__ == "__main__":
    main()
