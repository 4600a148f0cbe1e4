#!/usr/bin/env python3
"""Run every built-in sweep into one output directory.

The punish-effort sweep certifies an equilibrium per grid point and takes a
few tens of seconds; the rest are near-instant. Pass --quick to shrink the
certification grid for a fast smoke run.
"""

import argparse
import time

from creatorgame.experiments import SweepSpec, builtin_sweeps, run_sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quick", action="store_true",
                        help="shrink the equilibrium-certification grid")
    args = parser.parse_args()

    for name, specs in builtin_sweeps().items():
        for spec in specs:
            if args.quick and spec.kind == "punish_effort":
                spec = SweepSpec(name=spec.name, kind=spec.kind, grid_param=spec.grid_param,
                                 grid=spec.grid[:3], params=dict(spec.params, horizon=10))
            started = time.perf_counter()
            csv_path, _ = run_sweep(spec, args.out_dir, args.seed)
            print(f"{name:22s} -> {csv_path} ({time.perf_counter() - started:.1f}s)")


if __name__ == "__main__":
    main()
