#!/usr/bin/env python3
"""Discrete-hedging error against rebalancing frequency.

Replicates a call with the series delta on simulated paths and reports the
RMS terminal error for doubling rebalance counts; the ratio column should
hover near 1/sqrt(2) once the schedule is fine enough.

Usage: python scripts/hedge_convergence.py [--paths 4000] [--seed 101]
"""

import argparse
import sys

import targetzone as tz

LO, HI = 7.75, 7.85


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--paths", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=101)
    parser.add_argument("--tenor", type=float, default=0.5)
    parser.add_argument("--modes", type=int, default=384)
    args = parser.parse_args()

    band = tz.Band(0.0, 1.0)
    s_mid, gamma = tz.fit_cos_band(LO, HI)
    model = tz.build_cos_model(s_mid, gamma, band, 0.1)
    eig = model.eigensystem(args.modes)
    claim = tz.Claim.call(s_mid)

    steps = [8, 16, 32, 64, 128, 256]
    cfg = tz.McConfig(paths=args.paths, dt=args.tenor / 4096, seed=args.seed)
    res = tz.replicate_sweep(claim, model, s_mid, args.tenor, steps, cfg,
                             eig=eig)

    print(f"at-the-money call, spot=strike={s_mid:.6f}, T={args.tenor}, "
          f"{args.paths} paths, seed {args.seed}")
    print(f"{'steps':>6} {'rms error':>12} {'ratio':>7}")
    prev = None
    for s in steps:
        rms = res[s].mean
        ratio = f"{rms / prev:.3f}" if prev is not None else "-"
        print(f"{s:>6} {rms:>12.3e} {ratio:>7}")
        prev = rms
    return 0


if __name__ == "__main__":
    sys.exit(main())
