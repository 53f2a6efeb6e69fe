#!/usr/bin/env python3
"""Render figures from the CSV reports written by the binklf CLI.

Consumes only the published table contracts (trace.csv, rmse.csv, mk.csv);
no shared code with the estimation library. Inputs are opened read-only and
never modified. Output is PNG with a pinned style and stripped writer
metadata so repeated renders of the same table are stable.
"""

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be set first

KINDS = ("trace", "rmse", "mk")

STYLE = {
    "figure.figsize": (8.0, 4.5),
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
}


class ColumnError(ValueError):
    """A required column is absent from the input table."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    source: Path
    out: Path
    sensor_total: int | None = None
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"expected one of {KINDS}")


def read_table(path) -> dict:
    """Load a CSV report as column name -> list of floats."""
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if not reader.fieldnames:
            raise ColumnError(f"{path} has no header row")
        table = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name in table:
                table[name].append(float(row[name]))
    return table


def _require(table: dict, column: str, path) -> list:
    if column not in table:
        raise ColumnError(f"{path} is missing required column {column!r}")
    return table[column]


def _family(table: dict, prefix: str, path) -> list:
    names = [name for name in table if name.startswith(prefix)]
    if not names:
        raise ColumnError(
            f"{path} has no columns starting with {prefix!r}")
    return names


def _draw_trace(spec: FigureSpec, table: dict, fig):
    k = _require(table, "k", spec.source)
    truth_cols = _family(table, "x_true_", spec.source)
    axes = fig.subplots(len(truth_cols), 1, squeeze=False)[:, 0]
    for axis, truth in zip(axes, truth_cols):
        index = truth.removeprefix("x_true_")
        estimate = _require(table, f"x_hat_{index}", spec.source)
        axis.plot(k, table[truth], label=truth, color="black")
        axis.plot(k, estimate, label=f"x_hat_{index}", color="tab:red",
                  linestyle="--")
        axis.set_ylabel(f"state {index}")
        axis.legend(loc="best")
    axes[-1].set_xlabel("step k")


def _draw_rmse(spec: FigureSpec, table: dict, fig):
    k = _require(table, "k", spec.source)
    axis = fig.subplots()
    for name in _family(table, "rmse_", spec.source):
        axis.plot(k, table[name], label=name.removeprefix("rmse_"))
    axis.set_xlabel("step k")
    axis.set_ylabel("rmse")
    axis.legend(loc="best")


def _draw_mk(spec: FigureSpec, table: dict, fig):
    k = _require(table, "k", spec.source)
    axis = fig.subplots()
    for name in _family(table, "mean_mk_", spec.source):
        axis.plot(k, table[name], label=name.removeprefix("mean_mk_"))
    if spec.sensor_total is not None:
        axis.axhline(spec.sensor_total, color="gray", linestyle=":",
                     label=f"all {spec.sensor_total} sensors")
    axis.set_xlabel("step k")
    axis.set_ylabel("mean active sensors")
    axis.legend(loc="best")


_DRAWERS = {"trace": _draw_trace, "rmse": _draw_rmse, "mk": _draw_mk}


def render(spec: FigureSpec) -> Path:
    table = read_table(spec.source)
    with plt.rc_context(STYLE):
        fig = plt.figure()
        try:
            _DRAWERS[spec.kind](spec, table, fig)
            if spec.title:
                fig.suptitle(spec.title)
            fig.tight_layout()
            out = Path(spec.out)
            out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(out, metadata={"Software": None})
        finally:
            plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="source", required=True,
                        help="input CSV report")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--sensor-total", type=int, default=None,
                        help="draw a reference line at this sensor count")
    parser.add_argument("--title", default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = FigureSpec(kind=args.kind, source=Path(args.source),
                          out=Path(args.out), sensor_total=args.sensor_total,
                          title=args.title)
        out = render(spec)
    except (ColumnError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
