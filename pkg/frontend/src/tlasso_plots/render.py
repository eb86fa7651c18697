"""Render the standard figures from the frozen experiment CSV schemas.

This package never recomputes a solve: it reads the CSVs (and the manifest
JSON written next to them) and draws. Output is deterministic: same CSV and
spec give byte-identical image files.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("decay", "phase", "tsweep", "width")

# Column lists frozen by the experiment harness; these are the interface.
SCHEMAS = {
    "decay": ["sweep_kind", "m", "n", "s", "k", "trial", "seed", "mu", "sigma",
              "psi_hat", "joint_error", "signal_error", "corruption_error",
              "iterations", "converged"],
    "phase": ["m", "axis", "axis_value", "success_rate", "trials"],
    "tsweep": ["t", "omega_t", "omega_t_se", "bound_proxy", "achieved_error"],
    "width": ["quantity", "set_spec", "t", "mean", "std_error", "trials", "seed"],
}


class SchemaError(Exception):
    """CSV columns do not match the frozen schema for the figure kind."""


class EmptyInputError(Exception):
    """CSV has a header but no data rows."""


class FitMismatchError(Exception):
    """Locally re-fitted slope disagrees with the harness manifest."""


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    kind: str
    out_path: str
    title: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")


def read_rows(path: str, kind: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in SCHEMAS[kind] if c not in header]
        if missing:
            raise SchemaError(f"{path} is missing columns {missing} for kind {kind!r}")
        rows = list(reader)
    if not rows:
        raise EmptyInputError(f"{path} has no data rows")
    return rows


def load_manifest(csv_path: str) -> dict | None:
    path = csv_path + ".manifest.json"
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        return json.load(fh)


def fit_decay_slope(rows: list[dict]) -> tuple[float, dict[int, float]]:
    """Slope of log median joint error vs log m; mirrors the harness fit."""
    by_m: dict[int, list[float]] = {}
    for r in rows:
        by_m.setdefault(int(r["m"]), []).append(float(r["joint_error"]))
    medians = {m: float(np.median(v)) for m, v in sorted(by_m.items())}
    if len(medians) < 2 or any(v <= 0 for v in medians.values()):
        raise EmptyInputError("decay fit needs >= 2 positive per-m medians")
    slope, _ = np.polyfit(np.log(list(medians.keys())), np.log(list(medians.values())), 1)
    return float(slope), medians


def _new_figure(title: str | None):
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=120)
    if title:
        ax.set_title(title)
    return fig, ax


def _render_decay(spec: FigureSpec, rows: list[dict]):
    slope, medians = fit_decay_slope(rows)
    manifest = load_manifest(spec.csv_path)
    if manifest and manifest.get("fit"):
        harness = float(manifest["fit"]["exponent"])
        if abs(harness - slope) > 1e-6:
            raise FitMismatchError(
                f"local slope {slope:.8f} vs harness {harness:.8f}")
    fig, ax = _new_figure(spec.title)
    ms = np.array(list(medians.keys()), dtype=float)
    errs = np.array(list(medians.values()))
    ax.loglog(ms, errs, "o-", label="median joint error")
    anchor = errs[0] / ms[0] ** slope
    ax.loglog(ms, anchor * ms ** slope, "--",
              label=f"fit: slope {slope:.3f}")
    ax.set_xlabel("measurements m")
    ax.set_ylabel("median joint error")
    ax.legend()
    return fig, {"slope": slope}


def _render_phase(spec: FigureSpec, rows: list[dict]):
    ms = sorted({int(r["m"]) for r in rows})
    vals = sorted({int(r["axis_value"]) for r in rows})
    axis = rows[0]["axis"]
    grid = np.full((len(vals), len(ms)), np.nan)
    for r in rows:
        grid[vals.index(int(r["axis_value"])), ms.index(int(r["m"]))] = float(r["success_rate"])
    fig, ax = _new_figure(spec.title)
    im = ax.imshow(grid, origin="lower", aspect="auto", vmin=0.0, vmax=1.0,
                   cmap="viridis",
                   extent=(-0.5, len(ms) - 0.5, -0.5, len(vals) - 0.5))
    ax.set_xticks(range(len(ms)), [str(m) for m in ms])
    ax.set_yticks(range(len(vals)), [str(v) for v in vals])
    ax.set_xlabel("measurements m")
    ax.set_ylabel(axis)
    fig.colorbar(im, ax=ax, label="success rate")
    return fig, {}


def _render_tsweep(spec: FigureSpec, rows: list[dict]):
    ts = np.array([float(r["t"]) for r in rows])
    proxy = np.array([float(r["bound_proxy"]) for r in rows])
    achieved = np.array([float(r["achieved_error"]) for r in rows])
    manifest = load_manifest(spec.csv_path)
    c_hat = float(manifest["C_hat"]) if manifest and "C_hat" in manifest else None
    fig, ax = _new_figure(spec.title)
    ax.loglog(ts, proxy, "s-", label="bound proxy")
    if c_hat is not None:
        ax.loglog(ts, c_hat * proxy, ":", label=f"bound proxy x C_hat={c_hat:.3g}")
    ax.loglog(ts, achieved, "o-", label="achieved error")
    ax.set_xlabel("t")
    ax.set_ylabel("error")
    ax.legend()
    return fig, {"c_hat": c_hat}


def _render_width(spec: FigureSpec, rows: list[dict]):
    means = np.array([float(r["mean"]) for r in rows])
    ses = np.array([float(r["std_error"]) for r in rows])
    labels = [f'{r["quantity"]}:{r["set_spec"]}' + (f'@t={r["t"]}' if r["t"] else "")
              for r in rows]
    fig, ax = _new_figure(spec.title)
    xs = np.arange(len(rows))
    ax.errorbar(xs, means, yerr=ses, fmt="o", capsize=3)
    ax.set_xticks(xs, labels, rotation=30, ha="right")
    ax.set_ylabel("estimate")
    fig.tight_layout()
    return fig, {}


_RENDERERS = {"decay": _render_decay, "phase": _render_phase,
              "tsweep": _render_tsweep, "width": _render_width}


def render(spec: FigureSpec) -> dict:
    """Render one figure to spec.out_path; returns kind-specific annotations."""
    rows = read_rows(spec.csv_path, spec.kind)
    fig, info = _RENDERERS[spec.kind](spec, rows)
    try:
        fig.savefig(spec.out_path, metadata={"Software": "tlasso-plots"})
    finally:
        plt.close(fig)
    return info
