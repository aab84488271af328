"""Tests for SVG, CSV and PNG rendering."""

import numpy as np
import pytest

from src.core.errors import PreconditionError
from src.core.plateau import GridBase, GridSection
from src.services.render import (
    DiamondSlice,
    diamond_figure,
    diamond_svg,
    emit_csv,
    emit_png,
    emit_svg,
    membership_csv,
    section_figure,
    section_grid,
    section_svg,
)
from src.ui.theme import PALETTE, SECTION_STOPS, member_colormap, section_colormap

matplotlib = pytest.importorskip("matplotlib")


def test_diamond_svg_is_deterministic():
    geometry = DiamondSlice(1, 1, resolution=16)
    first = diamond_svg(geometry)
    assert first == diamond_svg(DiamondSlice(1, 1, resolution=16))
    assert first.startswith("<?xml")
    assert 'id="diamond-boundary"' in first
    assert 'id="diamond-members"' in first
    assert first.rstrip().endswith("</svg>")


def test_diamond_svg_axes_only():
    text = diamond_svg(None)
    assert 'id="axis-horizontal"' in text and 'id="axis-vertical"' in text
    assert 'id="diamond-boundary"' not in text


def test_diamond_figure_draws_closed_boundary():
    fig = diamond_figure(DiamondSlice(1, 1, resolution=8))
    try:
        (boundary,) = [line for line in fig.axes[0].lines if line.get_gid() == "diamond-boundary"]
        xy = boundary.get_xydata()
        assert len(xy) == 403
        assert np.allclose(xy[0], xy[-1])
        assert fig.axes[0].get_xlim() == pytest.approx((-1.25, 1.25))
    finally:
        matplotlib.pyplot.close(fig)


def test_boundary_polyline_of_unit_slice():
    outline = DiamondSlice(1, 1).boundary_polyline()
    assert outline.shape == (402, 2)
    assert np.allclose(outline[100], (0.0, 1.0))
    assert np.allclose(np.abs(outline[:, 0]) + np.abs(outline[:, 1]), 1.0)


def test_slice_missing_the_diamond():
    geometry = DiamondSlice(2, 2, fixed={"y2": 1.0}, resolution=8)
    assert len(geometry.boundary_polyline()) == 0
    text = diamond_svg(geometry)
    assert 'id="diamond-boundary"' not in text
    assert 'id="diamond-members"' not in text


def test_membership_csv():
    text = membership_csv(DiamondSlice(1, 1, resolution=4))
    lines = text.splitlines()
    assert lines[0] == "x_plus_1,x_minus_1,member"
    assert len(lines) == 17
    assert all(line.endswith(",0") or line.endswith(",1") for line in lines[1:])


def test_section_grid_layout():
    base = GridBase.box((0.0, 0.0), (1.0, 2.0), 3)
    section = GridSection(base, base.coords[:, 0] + 10.0 * base.coords[:, 1])
    xs, ys, grid = section_grid(section)
    assert np.allclose(xs, (0.0, 0.5, 1.0))
    assert np.allclose(ys, (0.0, 1.0, 2.0))
    assert np.allclose(grid, xs[None, :] + 10.0 * ys[:, None])
    with pytest.raises(PreconditionError):
        section_grid(GridSection(GridBase.box((0.0,), (1.0,), 3), np.zeros(3)))


def test_section_svg_heightfield():
    base = GridBase.box((0.0, 0.0), (1.0, 1.0), 4)
    text = section_svg(GridSection(base, base.coords[:, 0] * 0.5))
    assert 'id="section-heightfield"' in text
    assert 'id="section-boundary"' in text
    assert text == section_svg(GridSection(base, base.coords[:, 0] * 0.5))


def test_flat_section_uses_middle_of_ramp():
    base = GridBase.box((0.0, 0.0), (1.0, 1.0), 3)
    fig = section_figure(GridSection(base, np.full(9, 2.0)))
    try:
        (mesh,) = [c for c in fig.axes[0].collections if c.get_gid() == "section-heightfield"]
        assert mesh.norm.vmin == pytest.approx(1.5)
        assert mesh.norm.vmax == pytest.approx(2.5)
    finally:
        matplotlib.pyplot.close(fig)


def test_section_svg_graph_for_line_base():
    base = GridBase.box((0.0,), (1.0,), 5)
    text = section_svg(GridSection(base, 0.3 * base.coords[:, 0]))
    assert 'id="section-graph"' in text
    empty = section_svg(None)
    assert 'id="axis-horizontal"' in empty and 'id="section-graph"' not in empty


def test_colormaps():
    from matplotlib.colors import to_hex

    cmap = section_colormap()
    assert to_hex(cmap(0.0)) == SECTION_STOPS[0][1]
    assert to_hex(cmap(1.0)) == SECTION_STOPS[-1][1]
    assert to_hex(member_colormap()(0.0)) == PALETTE["member"]


def test_emit_svg_and_csv(tmp_path):
    geometry = DiamondSlice(1, 1, resolution=8)
    svg = emit_svg(geometry, tmp_path / "slice.svg")
    csv_path = emit_csv(geometry, tmp_path / "slice.csv")
    assert svg.read_text(encoding="utf-8") == diamond_svg(geometry)
    assert csv_path.read_text(encoding="utf-8") == membership_csv(geometry)


def test_emit_png(tmp_path):
    geometry = DiamondSlice(1, 1, resolution=8)
    first = emit_png(geometry, tmp_path / "slice.png").read_bytes()
    assert first[:8] == b"\x89PNG\r\n\x1a\n"
    assert emit_png(geometry, tmp_path / "again.png").read_bytes() == first
    base = GridBase.box((0.0, 0.0), (1.0, 1.0), 3)
    heightfield = emit_png(GridSection(base, base.coords[:, 1]), tmp_path / "section.png")
    assert heightfield.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
