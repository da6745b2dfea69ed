"""Render radial densities, phase maps, J_c trends, and decay curves.

Inputs are the documented CSV/JSON interfaces of the simulation toolkit;
nothing here touches its internals.  Styling is fixed and no timestamps are
embedded, so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

KINDS = ("radial", "phasemap", "critical", "decay")


@dataclass
class FigureSpec:
    kind: str
    inputs: list
    output: str
    baselines: list = field(default_factory=list)
    xlim: tuple | None = None
    ylim: tuple | None = None

    def validate(self) -> "FigureSpec":
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs and not (self.kind == "decay" and self.baselines):
            raise ValueError("need at least one input file")
        for p in list(self.inputs) + list(self.baselines):
            if not Path(p).is_file():
                raise ValueError(f"input file not found: {p}")
        return self


def _read_csv(path, columns):
    with open(path) as fh:
        reader = csv.DictReader(fh)
        missing = set(columns) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        rows = [[float(row[c]) for c in columns] for row in reader]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows).T


def _finish(fig, ax, spec):
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    fig.savefig(spec.output, dpi=150)
    plt.close(fig)


def render_radial(spec: FigureSpec) -> None:
    """Overlaid radial field densities, one curve per input file."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for path in spec.inputs:
        centers, density = _read_csv(path, ["bin_center", "density"])
        ax.plot(centers, density, label=Path(path).stem)
    ax.set_xlabel("local field magnitude r")
    ax.set_ylabel("density")
    ax.legend(frameon=False)
    _finish(fig, ax, spec)


def render_phasemap(spec: FigureSpec) -> None:
    """2D density of phase minus local-field angle vs normalized coupling."""
    cc, dc, dens = _read_csv(spec.inputs[0],
                             ["coupling_center", "delta_center", "density"])
    cvals = np.unique(cc)
    dvals = np.unique(dc)
    grid = np.full((len(dvals), len(cvals)), np.nan)
    ci = np.searchsorted(cvals, cc)
    di = np.searchsorted(dvals, dc)
    grid[di, ci] = dens
    fig, ax = plt.subplots(figsize=(5, 3.5))
    # darker shades mean higher density
    ax.pcolormesh(cvals, dvals, grid, cmap="Greys", shading="nearest")
    ax.set_xlabel("normalized coupling")
    ax.set_ylabel("phase - local field angle")
    _finish(fig, ax, spec)


def render_critical(spec: FigureSpec) -> None:
    """J_c versus N, one line per K, with the continuum reference at 2."""
    points = {}
    for path in spec.inputs:
        with open(path) as fh:
            d = json.load(fh)
        for key in ("n", "k", "j_c"):
            if key not in d:
                raise ValueError(f"{path}: missing key {key!r}")
        points.setdefault(d["k"], []).append((d["n"], d["j_c"], d.get("accuracy", 0)))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for k in sorted(points):
        pts = sorted(points[k])
        ns = [p[0] for p in pts]
        jcs = [p[1] for p in pts]
        errs = [p[2] for p in pts]
        ax.errorbar(ns, jcs, yerr=errs, marker="o", label=f"K = {k}")
    ax.axhline(2.0, color="black", linestyle=":", linewidth=1,
               label="continuum J_c = 2")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("J_c")
    ax.legend(frameon=False)
    _finish(fig, ax, spec)


def render_decay(spec: FigureSpec) -> None:
    """Log-log order-parameter decay; baselines (uncoupled runs) dashed."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for path in spec.inputs:
        t, v, _ = _read_csv(path, ["time", "mean_absZ", "stderr"])
        ax.loglog(t, v, label=Path(path).stem)
    for path in spec.baselines:
        t, v, _ = _read_csv(path, ["time", "mean_absZ", "stderr"])
        ax.loglog(t, v, linestyle="--", label=Path(path).stem + " (J=0)")
    ax.set_xlabel("t")
    ax.set_ylabel("|Z(t)|")
    ax.legend(frameon=False)
    _finish(fig, ax, spec)


_RENDERERS = {
    "radial": render_radial,
    "phasemap": render_phasemap,
    "critical": render_critical,
    "decay": render_decay,
}


def render(spec: FigureSpec) -> str:
    """Render one figure and return the output path."""
    spec.validate()
    _RENDERERS[spec.kind](spec)
    return spec.output
