#!/usr/bin/env python3
"""Run the desk-scale reference experiment end to end.

Equivalent to `rimnull full -c configs/desk.ini`, then sweeps the three
patterns (uniform weights, baseline-SA weights, guided weights) so the result
bundle feeds the plotting component directly. Runtime: a few minutes.
"""

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent

from rimnull.cli import main  # noqa: E402


def run() -> int:
    cfg = str(REPO / "configs" / "desk.ini")
    out = REPO / "results" / "desk"
    rc = main(["full", "-c", cfg, "-o", str(out)])
    if rc != 0:
        return rc
    for which in ("theoretical", "true"):
        rc = main(["pattern", "-c", cfg, "--which", which,
                   "-o", str(out / f"pattern_uniform_{which}.csv")])
        if rc != 0:
            return rc
        rc = main(["pattern", "-c", cfg, "--which", which,
                   "--weights", str(out / "resnet_sa_final_weights.txt"),
                   "-o", str(out / f"pattern_guided_{which}.csv")])
        if rc != 0:
            return rc
    rc = main(["pattern", "-c", cfg, "--which", "true",
               "--weights", str(out / "sa_final_weights.txt"),
               "-o", str(out / "pattern_baseline_true.csv")])
    if rc != 0:
        return rc
    print(f"desk experiment bundle written to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
