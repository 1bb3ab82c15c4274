"""Render starfd experiment CSVs into the four study figures.

The renderer never mutates or reorders its input; aggregation (per-scheme
mean with a min-max band) is recomputed independently in self-test mode and
compared exactly.  Output PNGs are 1200x800 and deterministic: identical
CSVs produce identical bytes.
"""

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

SUMMARY_COLUMNS = [
    "scheme",
    "sweep_param",
    "sweep_value",
    "seed",
    "p_u_dbm",
    "p_d_dbm",
    "total_dbm",
    "hd_slot_pu_dbm",
    "hd_slot_pd_dbm",
    "iterations",
    "converged",
    "r_u_achieved",
    "r_d_achieved",
    "status",
]
TRACE_COLUMNS = ["scheme", "seed", "n", "total_dbm", "sca_residual"]

X_LABELS = {
    2: "outer iteration n",
    3: "surface elements M",
    4: "DL rate demand (bps/Hz)",
    5: "SI attenuation (dB)",
}
TITLES = {
    2: "Total transmit power vs. iterations",
    3: "Total transmit power vs. surface elements",
    4: "Total transmit power vs. DL rate demand",
    5: "Total transmit power vs. SI attenuation",
}
SCHEME_STYLE = {
    "star-fd": ("tab:blue", "o"),
    "star-hd": ("tab:orange", "s"),
    "con-fd": ("tab:green", "^"),
}


class SchemaError(ValueError):
    """The CSV does not match the expected experiment schema."""


@dataclass(frozen=True)
class Curve:
    scheme: str
    x: np.ndarray
    mean: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


def read_rows(csv_path, figure_id: int) -> list[dict]:
    expected = TRACE_COLUMNS if figure_id == 2 else SUMMARY_COLUMNS
    with open(csv_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in expected if c not in header]
        if missing:
            raise SchemaError(f"missing column(s) in {csv_path}: {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{csv_path} holds no data rows")
    return rows


def _x_column(figure_id: int) -> str:
    return "n" if figure_id == 2 else "sweep_value"


def aggregate(rows: list[dict], figure_id: int) -> list[Curve]:
    """Per-scheme mean/min/max of total_dbm along the figure's x axis."""
    x_col = _x_column(figure_id)
    per_scheme: dict[str, dict[float, list[float]]] = {}
    for row in rows:
        if figure_id != 2 and row["status"] != "ok":
            continue
        scheme = row["scheme"]
        x = float(row[x_col])
        per_scheme.setdefault(scheme, {}).setdefault(x, []).append(
            float(row["total_dbm"])
        )
    curves = []
    for scheme in sorted(per_scheme):
        xs = np.array(sorted(per_scheme[scheme]))
        mean = np.array([np.mean(per_scheme[scheme][x]) for x in xs])
        lo = np.array([min(per_scheme[scheme][x]) for x in xs])
        hi = np.array([max(per_scheme[scheme][x]) for x in xs])
        curves.append(Curve(scheme, xs, mean, lo, hi))
    if not curves:
        raise SchemaError("no usable rows (all failed runs?)")
    return curves


def recompute_means_independently(rows: list[dict], figure_id: int) -> dict:
    """Second aggregation route for the self test: accumulate sums instead
    of collecting lists, then divide."""
    x_col = _x_column(figure_id)
    sums: dict[tuple, tuple[float, int]] = {}
    for row in rows:
        if figure_id != 2 and row["status"] != "ok":
            continue
        key = (row["scheme"], float(row[x_col]))
        total, count = sums.get(key, (0.0, 0))
        sums[key] = (total + float(row["total_dbm"]), count + 1)
    return {key: total / count for key, (total, count) in sums.items()}


def self_test(rows: list[dict], curves: list[Curve], figure_id: int):
    """Assert plotted aggregates equal the independently recomputed ones."""
    recomputed = recompute_means_independently(rows, figure_id)
    for curve in curves:
        for x, mean in zip(curve.x, curve.mean):
            other = recomputed[(curve.scheme, float(x))]
            if mean != other:
                raise AssertionError(
                    f"mean mismatch for {curve.scheme} at x={x}: "
                    f"plotted {mean!r} vs recomputed {other!r}"
                )
    if figure_id == 5:
        for curve in curves:
            if curve.scheme == "star-hd" and curve.mean.size:
                spread = float(curve.mean.max() - curve.mean.min())
                if spread != 0.0:
                    raise AssertionError(
                        f"half-duplex means vary across the SI sweep (spread {spread})"
                    )


def render(csv_path, figure_id: int, out_path, run_self_test: bool = False):
    """Write one PNG for the given figure id; returns the curves used."""
    if figure_id not in X_LABELS:
        raise ValueError(f"figure id must be one of {sorted(X_LABELS)}")
    rows = read_rows(csv_path, figure_id)
    curves = aggregate(rows, figure_id)
    if run_self_test:
        self_test(rows, curves, figure_id)

    fig, ax = plt.subplots(figsize=(12, 8), dpi=100)
    for curve in curves:
        color, marker = SCHEME_STYLE.get(curve.scheme, ("tab:gray", "x"))
        ax.plot(curve.x, curve.mean, color=color, marker=marker, label=curve.scheme)
        ax.fill_between(curve.x, curve.lo, curve.hi, color=color, alpha=0.15, linewidth=0)
    ax.set_xlabel(X_LABELS[figure_id])
    ax.set_ylabel("total transmit power (dBm)")
    ax.set_title(TITLES[figure_id])
    ax.grid(True, linestyle=":", alpha=0.6)
    ax.legend()
    fig.savefig(out_path, format="png", metadata={"Software": None})
    plt.close(fig)
    return curves
