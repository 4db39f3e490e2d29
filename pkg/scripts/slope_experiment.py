#!/usr/bin/env python3
"""Measure how the expected real-zero count grows with ln n.

Runs the exact integrator over a geometric ladder of n, fits the growth
slope, and prints it next to the candidate laws. Appends one CSV row per
n via the standard sweep schema when --output is given.
"""

import argparse
import math

from rzlab import ModelSpec, expected_zeros, fit_slope, predict
from rzlab.cli import main as cli_main


def run(args):
    points = []
    print(f"# kind={args.kind} sigma={args.sigma} rho={args.rho} tol={args.tol}")
    print("n,en_total,sigma_scaled,unit_variance")
    for k in range(args.k_min, args.k_max + 1):
        n = 2 ** k
        rep = expected_zeros(ModelSpec(args.kind, n, args.sigma, args.rho), args.tol)
        points.append((n, rep.en_total))
        print(f"{n},{rep.en_total:.10f},"
              f"{predict('sigma_scaled', n, args.sigma):.10f},"
              f"{predict('unit_variance', n):.10f}")
    fit = fit_slope(points)
    print(f"# fitted slope {fit.slope:.6f} +- {fit.slope_stderr:.2e} "
          f"(2/pi = {2 / math.pi:.6f}, 2/(pi*sigma) = {2 / (math.pi * args.sigma):.6f}); "
          f"residual rms {fit.residual_rms:.2e}")
    if args.output:
        ns = ",".join(str(2 ** k) for k in range(args.k_min, args.k_max + 1))
        cli_main(["sweep", "--kind", args.kind, "--sigma", str(args.sigma),
                  "--rho", str(args.rho), "--n", ns, "--method", "kacrice",
                  "--tol", str(args.tol), "--output", args.output])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", default="independent")
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--rho", type=float, default=0.0)
    ap.add_argument("--k-min", type=int, default=6, help="smallest n = 2^k")
    ap.add_argument("--k-max", type=int, default=12, help="largest n = 2^k")
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--output", help="path prefix for sweep CSV/JSON")
    run(ap.parse_args())
