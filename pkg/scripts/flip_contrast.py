#!/usr/bin/env python3
"""Tabulate the definitional contrast on the flip process.

For Gaussian packets at increasing offsets, the RMS position disturbance is
2*sqrt(x0^2 + sigma^2) while the distribution distance is 2*|x0|: at x0 = 0
the flip moves every amplitude yet leaves the position distribution fixed.
"""

import csv
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from edlab import (  # noqa: E402
    FlipChannel,
    GaussianState,
    busch_state_disturbance,
    make_grid,
    make_state,
    ozawa_disturbance,
)

OUT = os.path.join(os.path.dirname(__file__), "..", "out")


def main():
    os.makedirs(OUT, exist_ok=True)
    grid = make_grid(256, -16.0, 16.0)
    path = os.path.join(OUT, "flip_contrast.csv")
    rows = []
    for x0 in (0.0, 0.25, 0.5, 1.0, 2.0, 4.0):
        psi = make_state(grid, GaussianState(x0, 0.0, 1.0))
        rows.append(
            (
                x0,
                ozawa_disturbance(FlipChannel(), psi, "X"),
                busch_state_disturbance(FlipChannel(), psi, "X"),
            )
        )
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x0", "rms_disturbance_X", "w2_disturbance_X"])
        for x0, rms, w2 in rows:
            w.writerow([f"{x0:.12g}", f"{rms:.12g}", f"{w2:.12g}"])
    print(f"{'x0':>6}  {'RMS':>12}  {'W2':>12}")
    for x0, rms, w2 in rows:
        print(f"{x0:6.2f}  {rms:12.6f}  {w2:12.6f}")
    print(f"\nwrote {path}")


if __name__ == "__main__":
    main()
