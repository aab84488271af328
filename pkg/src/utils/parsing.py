"""Command-line argument parsing for vectors, point lists and slice selectors."""

from __future__ import annotations

from typing import Dict, List

import numpy as np

from ..core.errors import PreconditionError


def parse_vector(text: str) -> np.ndarray:
    """"1,0,-2.5" -> array([1., 0., -2.5])."""
    parts = [part.strip() for part in str(text).split(",")]
    if not parts or any(part == "" for part in parts):
        raise PreconditionError(f"malformed vector {text!r}")
    try:
        return np.array([float(part) for part in parts])
    except ValueError as exc:
        raise PreconditionError(f"malformed vector {text!r}") from exc


def parse_points(text: str) -> np.ndarray:
    """"1,2;3,4" -> 2x2 array; every point must share one dimension."""
    rows: List[np.ndarray] = [parse_vector(chunk) for chunk in str(text).split(";") if chunk.strip()]
    if not rows:
        raise PreconditionError("expected at least one point")
    if len({row.shape[0] for row in rows}) != 1:
        raise PreconditionError(f"points in {text!r} have different dimensions")
    return np.vstack(rows)


def parse_slice(text: str) -> Dict[str, float]:
    """"y2=0,x2=0.5" -> {"y2": 0.0, "x2": 0.5}; an empty string selects nothing."""
    out: Dict[str, float] = {}
    for chunk in str(text or "").split(","):
        if not chunk.strip():
            continue
        name, sep, value = chunk.partition("=")
        name = name.strip()
        if not sep or len(name) < 2 or name[0] not in "xy" or not name[1:].isdigit():
            raise PreconditionError(f"malformed slice selector {chunk!r}")
        try:
            out[name] = float(value)
        except ValueError as exc:
            raise PreconditionError(f"malformed slice value in {chunk!r}") from exc
    return out


__all__ = ["parse_vector", "parse_points", "parse_slice"]
