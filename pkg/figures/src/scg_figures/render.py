"""Render experiment CSVs into deterministic PNG figures.

The renderer only ever reads CSV files written by the simulation CLI; it has
no in-process coupling to the simulator, so either side can evolve alone.
Outputs are byte-stable: fixed figure geometry, fixed DPI, no timestamps.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("nnc_phase", "delay_distance", "degree_compare",
                "percolation_curve")

REQUIRED_COLUMNS = {
    "nnc_phase": ["p", "ratio", "mean", "stderr", "censor_rate",
                  "analytic_mean"],
    "delay_distance": ["distance", "p", "eta", "trial", "delay", "hops",
                       "censored"],
    "degree_compare": ["lambda_l", "lambda_e", "p", "direction", "mc_mean",
                       "mc_stderr", "analytic"],
    "percolation_curve": ["ratio", "trial", "crossing", "largest_fraction"],
}


class SchemaMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    figure_kind: str
    output_image: str
    title: str | None = None
    log_x: bool = False
    dpi: int = 130
    style: dict = field(default_factory=dict)


def read_rows(path: str, kind: str) -> list[dict]:
    if kind not in FIGURE_KINDS:
        raise SchemaMismatch(f"unknown figure kind {kind!r}")
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaMismatch(f"{path}: empty file")
        missing = [c for c in REQUIRED_COLUMNS[kind]
                   if c not in reader.fieldnames]
        if missing:
            raise SchemaMismatch(f"{path}: missing columns {missing}")
        rows = list(reader)
    if not rows:
        raise SchemaMismatch(f"{path}: no data rows")
    return rows


def _num(value: str) -> float:
    return float(value) if value not in ("", None) else math.nan


def render(spec: FigureSpec) -> str:
    """Draw the figure and write it atomically; returns the output path."""
    rows = read_rows(spec.input_csv, spec.figure_kind)
    fig, ax = plt.subplots(figsize=(7.0, 4.6))
    try:
        _DRAWERS[spec.figure_kind](ax, rows, spec)
        if spec.title:
            ax.set_title(spec.title)
        if spec.log_x:
            ax.set_xscale("log")
        fig.tight_layout()
        directory = os.path.dirname(os.path.abspath(spec.output_image))
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".png")
        try:
            with os.fdopen(fd, "wb") as fh:
                fig.savefig(fh, format="png", dpi=spec.dpi,
                            metadata={"Software": "scg-fig"})
            os.replace(tmp, spec.output_image)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    finally:
        plt.close(fig)
    return spec.output_image


def _series(rows: list[dict], key) -> list[tuple]:
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(key(row), []).append(row)
    return sorted(groups.items())


def _draw_nnc_phase(ax, rows, spec):
    for p_value, group in _series(rows, lambda r: _num(r["p"])):
        group = sorted(group, key=lambda r: _num(r["ratio"]))
        ratios = np.array([_num(r["ratio"]) for r in group])
        means = np.array([_num(r["mean"]) for r in group])
        errs = np.array([_num(r["stderr"]) for r in group])
        ax.errorbar(ratios, means, yerr=errs, marker="o", capsize=3,
                    label=f"simulated p={p_value:g}")
        analytic = np.array([_num(r["analytic_mean"]) for r in group])
        ok = ~np.isnan(analytic)
        ax.plot(ratios[ok], analytic[ok], linestyle="--",
                label=f"closed form p={p_value:g}")
    ax.set_xlabel("density ratio lambda_l / lambda_e")
    ax.set_ylabel("mean slots to nearest-neighbor connectivity")
    ax.legend(fontsize=8)


def _draw_delay_distance(ax, rows, spec):
    def variant(row):
        return (_num(row["p"]), _num(row["eta"]))

    for (p_value, eta), group in _series(rows, variant):
        by_distance: dict[float, list[float]] = {}
        for row in group:
            if row["censored"] in ("1", "True", "true"):
                continue
            by_distance.setdefault(_num(row["distance"]), []).append(
                _num(row["delay"]))
        if not by_distance:
            continue
        distances = np.array(sorted(by_distance))
        means = np.array([np.mean(by_distance[d]) for d in distances])
        errs = np.array([
            (np.std(by_distance[d], ddof=1) / math.sqrt(len(by_distance[d])))
            if len(by_distance[d]) > 1 else 0.0
            for d in distances])
        label = f"p={p_value:g}, eta={eta:g}"
        line = ax.errorbar(distances, means, yerr=errs, marker="o",
                           capsize=3, label=label)
        if distances.size >= 2:
            slope, intercept = np.polyfit(distances, means, 1)
            xs = np.linspace(distances[0], distances[-1], 50)
            ax.plot(xs, slope * xs + intercept, linestyle="--",
                    color=line.lines[0].get_color(),
                    label=f"linear fit {label}")
    ax.set_xlabel("Euclidean distance")
    ax.set_ylabel("mean delay (slots)")
    ax.legend(fontsize=8)


def _draw_degree_compare(ax, rows, spec):
    markers = {"out": "o", "in": "s"}
    for direction, group in _series(rows, lambda r: r["direction"]):
        analytic = np.array([_num(r["analytic"]) for r in group])
        mc = np.array([_num(r["mc_mean"]) for r in group])
        err = np.array([_num(r["mc_stderr"]) for r in group])
        ax.errorbar(analytic, mc, yerr=3 * err, linestyle="none",
                    marker=markers.get(direction, "x"), capsize=2,
                    label=f"{direction}-degree cells")
    top = max(_num(r["analytic"]) for r in rows) * 1.05 + 1e-9
    diag = np.linspace(0.0, top, 20)
    ax.plot(diag, diag, linestyle=":", color="gray", label="closed form")
    ax.set_xlabel("closed-form mean degree")
    ax.set_ylabel("Monte Carlo mean degree (3 se bars)")
    ax.legend(fontsize=8)


def _draw_percolation_curve(ax, rows, spec):
    by_ratio: dict[float, list[dict]] = {}
    for row in rows:
        by_ratio.setdefault(_num(row["ratio"]), []).append(row)
    ratios = np.array(sorted(by_ratio))
    cross = np.array([np.mean([_num(r["crossing"]) for r in by_ratio[x]])
                      for x in ratios])
    n = np.array([len(by_ratio[x]) for x in ratios], dtype=float)
    err = np.sqrt(cross * (1 - cross) / n)
    frac = np.array([np.mean([_num(r["largest_fraction"]) for r in by_ratio[x]])
                     for x in ratios])
    ax.errorbar(ratios, cross, yerr=err, marker="o", capsize=3,
                label="crossing probability")
    ax.plot(ratios, frac, marker="s", linestyle="--",
            label="mean largest-component fraction")
    ax.set_xlabel("density ratio lambda_l / lambda_e")
    ax.set_ylabel("probability / fraction")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=8)


_DRAWERS = {
    "nnc_phase": _draw_nnc_phase,
    "delay_distance": _draw_delay_distance,
    "degree_compare": _draw_degree_compare,
    "percolation_curve": _draw_percolation_curve,
}
