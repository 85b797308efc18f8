"""Overlaid gain-vs-angle pattern plots with an optional null-angle marker.

Each curve comes from a pattern CSV (``psi_deg, gain_dbi``). The null marker
angle can be given directly or taken from an experiment summary JSON
(``target_psi_deg``). Exit codes: 0 success, 2 bad input.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "rimplots"  # deterministic element ids
import matplotlib.pyplot as plt  # noqa: E402

from .csvio import PlotInputError, read_csv_columns, read_summary  # noqa: E402


@dataclass
class CurveSpec:
    path: str
    label: str
    color: str | None = None


@dataclass
class PatternPlotSpec:
    curves: list[CurveSpec]
    output_path: str
    marker_psi_deg: float | None = None
    psi_range_deg: tuple[float, float] | None = None
    gain_range_db: tuple[float, float] | None = None
    title: str = ""


def plot_pattern(spec: PatternPlotSpec) -> None:
    if not spec.curves:
        raise PlotInputError("no input curves given")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for curve in spec.curves:
        cols = read_csv_columns(curve.path, ("psi_deg", "gain_dbi"))
        ax.plot(cols["psi_deg"], cols["gain_dbi"], label=curve.label,
                color=curve.color)
    if spec.marker_psi_deg is not None:
        ax.axvline(spec.marker_psi_deg, color="0.4", linestyle="--",
                   linewidth=1, label=f"null at {spec.marker_psi_deg:g}°")
    ax.set_xlabel("zenith angle ψ (deg)")
    ax.set_ylabel("gain (dBi)")
    if spec.psi_range_deg:
        ax.set_xlim(*spec.psi_range_deg)
    if spec.gain_range_db:
        ax.set_ylim(*spec.gain_range_db)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output_path, metadata=_stable_metadata(spec.output_path))
    plt.close(fig)


def _stable_metadata(output_path: str) -> dict | None:
    # keep re-plots byte-stable by dropping the volatile date stamp
    if str(output_path).endswith(".svg"):
        return {"Date": None}
    if str(output_path).endswith(".png"):
        return {"Software": None}
    return None


def _parse_curve(text: str) -> CurveSpec:
    parts = text.split(":")
    if len(parts) == 1:
        return CurveSpec(parts[0], parts[0])
    if len(parts) == 2:
        return CurveSpec(parts[0], parts[1])
    return CurveSpec(parts[0], parts[1], parts[2])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plot_pattern",
        description="Overlay gain-vs-angle pattern CSVs "
                    "(columns: psi_deg, gain_dbi).")
    ap.add_argument("--curve", action="append", required=True,
                    metavar="CSV[:LABEL[:COLOR]]",
                    help="pattern CSV, optionally with a label and color; "
                         "repeatable")
    ap.add_argument("--summary", help="experiment summary JSON; its "
                    "target_psi_deg places the null marker")
    ap.add_argument("--marker-deg", type=float,
                    help="null marker angle (overrides --summary)")
    ap.add_argument("--psi-range", nargs=2, type=float, metavar=("MIN", "MAX"))
    ap.add_argument("--gain-range", nargs=2, type=float, metavar=("MIN", "MAX"))
    ap.add_argument("--title", default="")
    ap.add_argument("-o", "--output", required=True,
                    help="image path (.svg preferred, .png supported)")
    args = ap.parse_args(argv)

    try:
        marker = args.marker_deg
        if marker is None and args.summary:
            summary = read_summary(args.summary)
            if "target_psi_deg" not in summary:
                raise PlotInputError(
                    f"{args.summary}: missing key 'target_psi_deg'")
            marker = float(summary["target_psi_deg"])
        spec = PatternPlotSpec(
            curves=[_parse_curve(c) for c in args.curve],
            output_path=args.output,
            marker_psi_deg=marker,
            psi_range_deg=tuple(args.psi_range) if args.psi_range else None,
            gain_range_db=tuple(args.gain_range) if args.gain_range else None,
            title=args.title)
        plot_pattern(spec)
    except PlotInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
