"""SVG, CSV and PNG output for diamond slices and grid sections.

Why this design:
- Draw every figure through matplotlib's Agg backend so SVG and PNG come from one scene.
- Share one membership grid between the figure and the CSV so every output agrees.
- Pin the SVG hash salt and drop the date stamp so identical inputs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from ..core.diamond import membership_grid
from ..core.errors import PreconditionError
from ..core.plateau import GridSection
from ..ui.theme import PALETTE, member_colormap, section_colormap
from ..utils.plot_loader import get_pyplot
from .instances import write_atomic

LOGGER = logging.getLogger("pqcausal.render")

FIGSIZE = (4.0, 4.0)
DPI = 100
SVG_HASHSALT = "pqcausal"
SAVE_METADATA = {"svg": {"Date": None}, "png": {"Software": None}}


@dataclass(frozen=True, eq=False)
class DiamondSlice:
    """Canonical diamond restricted to the (x1, y1) plane, other coordinates fixed."""

    p: int
    q: int
    fixed: Mapping[str, float] = field(default_factory=dict)
    resolution: int = 64
    extent: float = 1.25

    def grid(self):
        return membership_grid(self.p, self.q, dict(self.fixed), self.resolution, self.extent)

    def fixed_norms(self) -> tuple:
        spatial = sum(v * v for k, v in self.fixed.items() if k.startswith("x"))
        temporal = sum(v * v for k, v in self.fixed.items() if k.startswith("y"))
        return float(np.sqrt(spatial)), float(np.sqrt(temporal))

    def boundary_polyline(self, samples: int = 201) -> np.ndarray:
        """Closed curve sqrt(x^2 + sx^2) + sqrt(y^2 + sy^2) = 1; empty when the slice misses."""
        sx, sy = self.fixed_norms()
        reach = (1.0 - sy) ** 2 - sx * sx
        if sy >= 1.0 or reach <= 0.0:
            return np.zeros((0, 2))
        xs = np.linspace(-np.sqrt(reach), np.sqrt(reach), samples)
        temporal = 1.0 - np.sqrt(xs * xs + sx * sx)
        ys = np.sqrt(np.clip(temporal * temporal - sy * sy, 0.0, None))
        upper = np.column_stack([xs, ys])
        lower = np.column_stack([xs[::-1], -ys[::-1]])
        return np.vstack([upper, lower])


def _canvas(title: str, xlabel: str, ylabel: str):
    plt = get_pyplot()
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    fig.patch.set_facecolor(PALETTE["bg"])
    ax.set_facecolor(PALETTE["surface"])
    ax.set_title(title, color=PALETTE["text"])
    ax.set_xlabel(xlabel, color=PALETTE["muted"])
    ax.set_ylabel(ylabel, color=PALETTE["muted"])
    ax.tick_params(colors=PALETTE["muted"])
    for spine in ax.spines.values():
        spine.set_color(PALETTE["muted"])
    ax.axhline(0.0, color=PALETTE["muted"], linewidth=0.8, gid="axis-horizontal")
    ax.axvline(0.0, color=PALETTE["muted"], linewidth=0.8, gid="axis-vertical")
    return fig, ax


def _encode(fig, fmt: str) -> bytes:
    plt = get_pyplot()
    buffer = io.BytesIO()
    try:
        with plt.rc_context({"svg.hashsalt": SVG_HASHSALT}):
            fig.savefig(buffer, format=fmt, facecolor=fig.get_facecolor(), metadata=SAVE_METADATA[fmt])
    finally:
        plt.close(fig)
    return buffer.getvalue()


def diamond_figure(geometry: Optional[DiamondSlice]):
    """Shaded membership cells plus the exact boundary curve; axes only for None."""
    extent = geometry.extent if geometry is not None else 1.25
    fig, ax = _canvas("diamond slice", "x_plus_1", "x_minus_1")
    if geometry is not None:
        xs, ys, mask = geometry.grid()
        if mask.any():
            cells = np.ma.masked_where(~mask, np.ones(mask.shape))
            ax.pcolormesh(xs, ys, cells, shading="nearest", cmap=member_colormap(), alpha=0.45, gid="diamond-members")
        outline = geometry.boundary_polyline()
        if len(outline):
            closed = np.vstack([outline, outline[:1]])
            ax.plot(closed[:, 0], closed[:, 1], color=PALETTE["boundary"], linewidth=2.0, gid="diamond-boundary")
    ax.set_xlim(-extent, extent)
    ax.set_ylim(-extent, extent)
    ax.set_aspect("equal")
    return fig


def section_grid(section: GridSection, component: int = 0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Node values of a 2-D base laid out as [row=y, col=x]; lattice points off the base are NaN."""
    base = section.base
    if base.q != 2:
        raise PreconditionError("heightfield layout needs a 2-D base")
    h = np.asarray(base.spacing)
    lo = base.coords.min(axis=0)
    index = np.rint((base.coords - lo) / h).astype(int)
    cols, rows = index.max(axis=0) + 1
    grid = np.full((rows, cols), np.nan)
    grid[index[:, 1], index[:, 0]] = section.values[:, component]
    return lo[0] + h[0] * np.arange(cols), lo[1] + h[1] * np.arange(rows), grid


def section_figure(section: Optional[GridSection], component: int = 0):
    """Colour-mapped node values for q = 2, a value curve for q = 1."""
    if section is None:
        fig, ax = _canvas("section", "x", "value")
        ax.set_xlim(-1.0, 1.0)
        ax.set_ylim(-1.0, 1.0)
        return fig
    base = section.base
    if base.q not in (1, 2):
        raise PreconditionError("section rendering needs a 1-D or 2-D base")
    values = section.values[:, component]
    lo, hi = float(values.min()), float(values.max())
    if base.q == 2:
        xs, ys, grid = section_grid(section, component)
        fig, ax = _canvas("section heightfield", "x1", "x2")
        # A flat section sits in the middle of the ramp.
        vmin, vmax = (lo, hi) if hi > lo else (lo - 0.5, hi + 0.5)
        mesh = ax.pcolormesh(
            xs, ys, np.ma.masked_invalid(grid), shading="nearest", cmap=section_colormap(),
            vmin=vmin, vmax=vmax, gid="section-heightfield",
        )
        edge = base.coords[base.boundary]
        ax.scatter(edge[:, 0], edge[:, 1], s=6.0, color=PALETTE["boundary"], gid="section-boundary")
        fig.colorbar(mesh, ax=ax)
        ax.set_aspect("equal")
        return fig
    order = np.argsort(base.coords[:, 0], kind="stable")
    pad = max(hi - lo, 1e-9) * 0.1
    fig, ax = _canvas("section graph", "x", "value")
    ax.plot(base.coords[order, 0], values[order], color=PALETTE["accent"], linewidth=2.0, gid="section-graph")
    ax.set_ylim(lo - pad, hi + pad)
    return fig


def diamond_svg(geometry: Optional[DiamondSlice]) -> str:
    return _encode(diamond_figure(geometry), "svg").decode("utf-8")


def section_svg(section: Optional[GridSection], component: int = 0) -> str:
    return _encode(section_figure(section, component), "svg").decode("utf-8")


def _figure_for(geometry: Union[DiamondSlice, GridSection, None]):
    if isinstance(geometry, GridSection):
        return section_figure(geometry)
    return diamond_figure(geometry)


def emit_svg(geometry: Union[DiamondSlice, GridSection, None], path: Union[str, Path]) -> Path:
    target = write_atomic(path, _encode(_figure_for(geometry), "svg").decode("utf-8"))
    LOGGER.debug("svg-written", extra={"path": str(target)})
    return target


def membership_csv(geometry: DiamondSlice) -> str:
    xs, ys, mask = geometry.grid()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["x_plus_1", "x_minus_1", "member"])
    for row, y in enumerate(ys):
        for col, x in enumerate(xs):
            writer.writerow([f"{x:.6f}", f"{y:.6f}", int(mask[row, col])])
    return buffer.getvalue()


def emit_csv(geometry: DiamondSlice, path: Union[str, Path]) -> Path:
    return write_atomic(path, membership_csv(geometry))


def emit_png(geometry: Union[DiamondSlice, GridSection], path: Union[str, Path]) -> Path:
    target = write_atomic(path, _encode(_figure_for(geometry), "png"))
    LOGGER.debug("png-written", extra={"path": str(target)})
    return target


__all__ = [
    "DiamondSlice",
    "diamond_figure",
    "section_figure",
    "section_grid",
    "diamond_svg",
    "section_svg",
    "emit_svg",
    "membership_csv",
    "emit_csv",
    "emit_png",
]
