"""Four-curve convergence plot for one experiment bundle.

Inputs are the two chain CSVs exported by the optimizer (columns ``iter,
G_db, Gtrue_db, Gpred_db, accepted``): the plain-annealer baseline chain and
the network-guided chain. The four curves are the baseline's theoretical
objective, the same weights re-scored on the true pattern, the guided chain's
logged true gain, and the guided chain's predicted gain. Exit codes: 0
success, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .csvio import PlotInputError, read_csv_columns  # noqa: E402
from .pattern import _stable_metadata  # noqa: E402

CHAIN_COLUMNS = ("iter", "G_db", "Gtrue_db", "Gpred_db")


@dataclass
class ConvergencePlotSpec:
    baseline_chain_csv: str
    guided_chain_csv: str
    output_path: str
    gain_range_db: tuple[float, float] | None = None
    title: str = ""


def plot_convergence(spec: ConvergencePlotSpec) -> None:
    base = read_csv_columns(spec.baseline_chain_csv, CHAIN_COLUMNS)
    guided = read_csv_columns(spec.guided_chain_csv, CHAIN_COLUMNS)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(base["iter"], base["G_db"], color="black",
            label="annealer on theoretical pattern")
    ax.plot(base["iter"], base["Gtrue_db"], color="red",
            label="same weights on true pattern")
    ax.plot(guided["iter"], guided["Gtrue_db"], color="blue",
            label="guided chain, true gain")
    ax.plot(guided["iter"], guided["Gpred_db"], color="green", linestyle="--",
            label="guided chain, predicted gain")
    ax.set_xlabel("iteration")
    ax.set_ylabel("gain at target (dBi)")
    if spec.gain_range_db:
        ax.set_ylim(*spec.gain_range_db)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output_path, metadata=_stable_metadata(spec.output_path))
    plt.close(fig)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plot_convergence",
        description="Four-curve convergence plot from the baseline and "
                    "guided chain CSVs.")
    ap.add_argument("--baseline", required=True,
                    help="baseline chain CSV (sa_baseline_chain.csv)")
    ap.add_argument("--guided", required=True,
                    help="guided chain CSV (resnet_sa_chain.csv)")
    ap.add_argument("--gain-range", nargs=2, type=float, metavar=("MIN", "MAX"))
    ap.add_argument("--title", default="")
    ap.add_argument("-o", "--output", required=True,
                    help="image path (.svg preferred, .png supported)")
    args = ap.parse_args(argv)
    try:
        plot_convergence(ConvergencePlotSpec(
            baseline_chain_csv=args.baseline,
            guided_chain_csv=args.guided,
            output_path=args.output,
            gain_range_db=tuple(args.gain_range) if args.gain_range else None,
            title=args.title))
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
