"""SVG figures for the experiment runner.

Uses matplotlib's object API (no pyplot state), with the SVG hash salt and
date metadata pinned so that the same data always gives the same bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

_RC = {
    "svg.hashsalt": "skewrot",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def _figure(size=(5.0, 4.5)) -> Figure:
    return Figure(figsize=size, layout="constrained")


def _save(fig: Figure, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    return path


def orbit_scatter(path, series: Sequence[tuple], title: str = "",
                  equal: bool = True, contour: Optional[tuple] = None,
                  markers: Optional[Sequence[tuple]] = None) -> Path:
    """Scatter plot of one or more point clouds.

    ``series`` holds ``(label, xs, ys)`` triples.  ``contour`` is an
    optional ``(X, Y, Z, level)`` drawn as a dotted level curve, and
    ``markers`` a list of ``(label, x, y)`` points drawn as crosses.
    """
    with matplotlib.rc_context(_RC):
        fig = _figure()
        ax = fig.add_subplot()
        for label, xs, ys in series:
            ax.plot(xs, ys, linestyle="none", marker=".", markersize=1.2, label=label)
        if contour is not None:
            X, Y, Z, level = contour
            ax.contour(X, Y, Z, levels=[level], colors="black", linestyles="dotted", linewidths=0.8)
        for label, x, y in markers or ():
            ax.plot([x], [y], marker="x", color="black", linestyle="none")
            ax.annotate(label, (x, y), textcoords="offset points", xytext=(3, 3))
        ax.margins(0.05)
        if equal:
            ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(loc="best", markerscale=6)
        return _save(fig, path)


def line_plot(path, series: Sequence[tuple], title: str = "", xlabel: str = "",
              ylabel: str = "", logx: bool = False, logy: bool = False) -> Path:
    """Polylines from ``(label, xs, ys)`` triples."""
    with matplotlib.rc_context(_RC):
        fig = _figure((5.5, 3.8))
        ax = fig.add_subplot()
        for label, xs, ys in series:
            ax.plot(np.asarray(xs), np.asarray(ys), linewidth=0.8, label=label)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.margins(0.05)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        if len(series) > 1:
            ax.legend(loc="best")
        return _save(fig, path)


def thin(n: int, limit: int = 20000) -> slice:
    """Stride that keeps at most ``limit`` of ``n`` points; keeps SVGs small."""
    return slice(None, None, max(1, -(-n // limit)))
