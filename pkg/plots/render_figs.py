#!/usr/bin/env python3
"""Render the figure panels from the simulation CSVs.

This component maps CSV to pixels and nothing else: it never recomputes any
physics. Input files follow the floquet-sb CSV contract (one leading comment
line, then a header row); missing columns raise a schema error naming the
column. Rendering is deterministic: fixed figure sizes, fixed colormaps.

Usage: render_figs.py --fig <fig1b|fig1c|fig1d|fig2a|fig2b>
                      --csv <path> [<path> ...] --out <out.png>
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

FIGSIZE = (6.4, 4.2)
DPI = 150
CMAP = "viridis"
DOT_COLORS = ("#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


class SchemaError(ValueError):
    """The CSV does not match the expected column layout."""


def load_csv(path: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, comment="#")
    except (OSError, pd.errors.EmptyDataError) as exc:
        raise SchemaError(f"{path}: cannot read CSV ({exc})") from exc
    if frame.empty:
        raise SchemaError(f"{path}: CSV has no data rows")
    return frame


def require_columns(frame: pd.DataFrame, columns, path: str) -> None:
    for column in columns:
        if column not in frame.columns:
            raise SchemaError(f"{path}: missing required column '{column}'")


def render_fig1b(csv_paths, out_path):
    """Two stacked line panels: inversion at the two drive ratios."""
    frame = load_csv(csv_paths[0])
    require_columns(frame, ["time", "sz_lab_ratio1", "sz_lab_ratio2"],
                    csv_paths[0])
    fig, axes = plt.subplots(2, 1, figsize=FIGSIZE, sharex=True)
    axes[0].plot(frame["time"], frame["sz_lab_ratio1"], lw=0.8)
    axes[0].set_ylabel(r"$\langle\sigma_z\rangle$ (ratio 1)")
    axes[1].plot(frame["time"], frame["sz_lab_ratio2"], lw=0.8)
    axes[1].set_ylabel(r"$\langle\sigma_z\rangle$ (ratio 2)")
    axes[1].set_xlabel(r"time [$1/\omega_0$]")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def render_fig1c(csv_paths, out_path):
    """Density panel of the inversion envelope over ratio and time."""
    frame = load_csv(csv_paths[0])
    require_columns(frame, ["ratio", "time", "envelope"], csv_paths[0])
    grid = frame.pivot(index="ratio", columns="time", values="envelope")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    mesh = ax.pcolormesh(grid.columns.to_numpy(), grid.index.to_numpy(),
                         grid.to_numpy(), cmap=CMAP, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="upper envelope")
    ax.set_xlabel(r"time [$1/\omega_0$]")
    ax.set_ylabel("drive ratio")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def render_fig1d(csv_paths, out_path):
    """One line per drive frequency, labels from the header names."""
    frame = load_csv(csv_paths[0])
    require_columns(frame, ["time"], csv_paths[0])
    value_cols = [c for c in frame.columns if c != "time"]
    if not value_cols:
        raise SchemaError(f"{csv_paths[0]}: no data columns besides 'time'")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for column in value_cols:  # header order is preserved
        ax.plot(frame["time"], frame[column], lw=1.0, label=column)
    ax.set_xlabel(r"time [$1/\omega_0$]")
    ax.set_ylabel(r"$\langle\sigma_z\rangle$ (rotating frame)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def render_fig2a(csv_paths, out_path):
    """Driven curve with stroboscopic dot series; dots are never joined."""
    frame = load_csv(csv_paths[0])
    require_columns(frame, ["time", "sz_driven"], csv_paths[0])
    dot_cols = [c for c in frame.columns if c.startswith("sz_strob")]
    if not dot_cols:
        raise SchemaError(f"{csv_paths[0]}: no 'sz_strob*' dot columns")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    curve = frame.dropna(subset=["sz_driven"])
    ax.plot(curve["time"], curve["sz_driven"], color="#1f77b4", lw=1.0,
            label="driven")
    for i, column in enumerate(dot_cols):
        dots = frame.dropna(subset=[column])
        ax.plot(dots["time"], dots[column], linestyle="none", marker="o",
                ms=4, color=DOT_COLORS[i % len(DOT_COLORS)], label=column)
    ax.set_xlabel(r"time [$1/\omega_0$]")
    ax.set_ylabel(r"$\langle\sigma_z\rangle$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def render_fig2b(csv_paths, out_path):
    """Density of the stroboscopic family; rows interpolated along time."""
    frame = load_csv(csv_paths[0])
    require_columns(frame, ["tau", "time", "value"], csv_paths[0])
    taus = np.sort(frame["tau"].unique())
    t_grid = np.linspace(frame["time"].min(), frame["time"].max(), 400)
    img = np.empty((taus.size, t_grid.size))
    for i, tau in enumerate(taus):
        rows = frame[frame["tau"] == tau].sort_values("time")
        # each row only has samples at tau + nT: linear interpolation between
        # the dots, as declared for this panel
        img[i] = np.interp(t_grid, rows["time"], rows["value"])
    fig, ax = plt.subplots(figsize=FIGSIZE)
    mesh = ax.pcolormesh(t_grid, taus, img, cmap=CMAP, shading="nearest")
    fig.colorbar(mesh, ax=ax, label=r"$\langle\sigma^z_\tau\rangle$")
    ax.set_xlabel(r"time [$1/\omega_0$]")
    ax.set_ylabel(r"$\tau$ [$1/\omega_0$]")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


RENDERERS = {
    "fig1b": render_fig1b,
    "fig1c": render_fig1c,
    "fig1d": render_fig1d,
    "fig2a": render_fig2a,
    "fig2b": render_fig2b,
}


def render(fig_id: str, csv_paths, out_path) -> None:
    if fig_id not in RENDERERS:
        raise SchemaError(f"unknown figure id {fig_id!r}")
    if not csv_paths:
        raise SchemaError("at least one CSV path is required")
    RENDERERS[fig_id](list(csv_paths), out_path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fig", required=True, choices=sorted(RENDERERS))
    parser.add_argument("--csv", required=True, nargs="+")
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        render(args.fig, args.csv, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
