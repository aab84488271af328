"""Shared palette and section colour map for rendered figures.

Why this design:
- Centralize colours so SVG and PNG renders of one geometry match.
- Keep the dark background with neon accents of the original visual language.
- Hand the colour ramp to matplotlib instead of interpolating channels ourselves.
"""

from __future__ import annotations

from ..utils.plot_loader import get_colors

PALETTE = {
    "bg": "#060910",
    "surface": "#0d111d",
    "text": "#d7e3ff",
    "muted": "#8fa0c2",
    "accent": "#3d7dff",
    "member": "#4ade80",
    "boundary": "#ef4444",
}

# Dark blue -> accent blue -> green -> warm white.
SECTION_STOPS = (
    (0.0, "#0d111d"),
    (0.35, "#3d7dff"),
    (0.7, "#4ade80"),
    (1.0, "#fff4d6"),
)


def section_colormap():
    return get_colors().LinearSegmentedColormap.from_list("pqcausal-section", list(SECTION_STOPS))


def member_colormap():
    """Single-colour map for the masked membership grid."""
    return get_colors().ListedColormap([PALETTE["member"]], name="pqcausal-member")


__all__ = ["PALETTE", "SECTION_STOPS", "section_colormap", "member_colormap"]
