#!/usr/bin/env python3
"""Step-halving convergence table for the full kinetic-equation solve.

Prints endpoint coherence values and Richardson factors; a factor near 4
confirms second-order accuracy of the product-trapezoidal PECE scheme.
"""

import argparse

from qdeph import (
    QubitBathParams,
    SolverConfig,
    SpectralDensity,
    solve_full_equation,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta-omega0", type=float, default=0.1)
    ap.add_argument("--sigma3-mean", type=float, default=0.2)
    ap.add_argument("--coupling", type=float, default=1.0 / 3.0)
    ap.add_argument("--t-max", type=float, default=10.0)
    ap.add_argument("--levels", type=int, default=4,
                    help="number of grids, starting at 250 steps and doubling")
    args = ap.parse_args()

    J = SpectralDensity(coupling=args.coupling, omega_c=1.0, s=1.0)
    p = QubitBathParams(omega0=1.0, beta=args.beta_omega0,
                        sigma3_mean=args.sigma3_mean, spectral=J)

    endpoints = []
    steps = [250 * 2**k for k in range(args.levels)]
    for n in steps:
        traj = solve_full_equation(p, SolverConfig(t_max=args.t_max,
                                                   n_steps=n))
        endpoints.append(traj.values[-1])

    print(f"{'n_steps':>8}  {'y(t_max)':>28}  {'|delta|':>12}  {'factor':>7}")
    prev_delta = None
    for k, (n, y) in enumerate(zip(steps, endpoints)):
        if k == 0:
            print(f"{n:>8}  {y:>28.15f}")
            continue
        delta = abs(y - endpoints[k - 1])
        factor = f"{prev_delta / delta:7.3f}" if prev_delta else " " * 7
        print(f"{n:>8}  {y:>28.15f}  {delta:>12.3e}  {factor}")
        prev_delta = delta


if __name__ == "__main__":
    main()
