#!/usr/bin/env python3
"""End-to-end quadratic quantization of Brownian motion.

Simulates N paths, grows a codebook by greedy splitting with Lloyd
re-optimization at each size, then prints the error-vs-size table with
stationarity and admissibility diagnostics for the final quantizer.
"""

import argparse

import numpy as np

from fquant import (OptimizerConfig, ProcessSpec, boundary_pinning, holder_fit,
                    monotonicity_check, sample_paths, splitting_init,
                    stationarity_residual, uniform_space)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8, help="final codebook size")
    ap.add_argument("--paths", type=int, default=20000)
    ap.add_argument("--m", type=int, default=257, help="grid nodes")
    ap.add_argument("--seed", type=int, default=20260808)
    ap.add_argument("--out", default=None, help="optional codebook.bin target")
    args = ap.parse_args()

    space = uniform_space(1.0, args.m)
    sample = sample_paths(ProcessSpec("brownian"), space, args.paths, args.seed)
    cfg = OptimizerConfig(method="lloyd", max_iters=300, tol=1e-12, seed=args.seed)
    stages = splitting_init(sample, space, args.n, 2.0, args.seed, config=cfg,
                            return_stages=True)

    rep = monotonicity_check(stages, sample, 2.0)
    print(f"{'n':>3} {'quant_error':>12} {'stderr':>10}")
    for n, err, se in rep.entries:
        print(f"{n:>3} {err:>12.6f} {se:>10.2e}")
    if rep.flagged:
        print("flagged size pairs (decrease within 2 sigma):", rep.flagged)

    final = stages[-1]
    stat = stationarity_residual(final, sample, 2.0)
    print(f"\nfinal n={final.n}: max stationarity residual {stat.max_residual:.3e}, "
          f"cell masses {np.round(stat.cell_masses, 3)}, "
          f"tie mass {stat.tie_mass:.1e}, admissible={stat.admissible}")
    print(f"pinning |a(0)| = {boundary_pinning(final, ([0], 0.0)):.2e}")
    fit = holder_fit(final)
    print(f"holder exponents per atom: {np.round(fit.beta.ravel(), 3)}")

    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(final.to_binary())
        print(f"codebook -> {args.out}")


if __name__ == "__main__":
    main()
