#!/usr/bin/env python3
"""Scan the port coupling through the matching point.

Prints the first-echo efficiency and prompt reflection against kappa,
together with the closed-form estimates, showing the efficiency maximum
and reflection zero sitting at kappa_0 = 2*gamma_r + g^2/spacing.

Usage:
    python scripts/impedance_curve.py [--points 15]
"""

import argparse

import numpy as np

from combecho import (
    CommonResonator,
    DeviceConfig,
    auto_grid,
    build_uniform_comb,
    detect_echoes,
    integrate,
    kappa_matched,
    matched_pulse,
    median_spacing,
    reflection_center,
    summarize_comb,
)
from combecho.matching import _with_kappa


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--spacing", type=float, default=4.0)
    parser.add_argument("--coupling", type=float, default=4.0)
    parser.add_argument("--gamma", type=float, default=1e-3)
    parser.add_argument("--gamma-r", type=float, default=1e-3)
    parser.add_argument("--points", type=int, default=15)
    args = parser.parse_args()

    minis = build_uniform_comb(5, args.spacing, args.coupling, args.gamma)
    config = DeviceConfig(minis, CommonResonator(kappa=1.0, decay_rate=args.gamma_r))
    summary = summarize_comb(config)
    kappa0 = kappa_matched(summary, args.gamma_r)
    pulse = matched_pulse(minis)
    period = 1.0 / median_spacing(minis)

    print(f"matching point kappa_0 = {kappa0:.4f}\n")
    print(f"{'kappa':>9} {'kappa/k0':>9} {'eta_sim':>9} {'refl_sim':>9} {'R_formula':>10}")
    for kappa in np.geomspace(kappa0 / 5, 5 * kappa0, args.points):
        device = _with_kappa(config, float(kappa))
        grid, p = auto_grid(device, pulse)
        trace = integrate(device, p, grid)
        report = detect_echoes(
            trace, (p.center_time - period / 2, p.center_time + period / 2), period
        )
        print(
            f"{kappa:9.4f} {kappa / kappa0:9.3f} {report.efficiency(1):9.4f} "
            f"{report.reflected_fraction:9.4f} "
            f"{reflection_center(summary, float(kappa), args.gamma_r):10.4f}"
        )


if __name__ == "__main__":
    main()
