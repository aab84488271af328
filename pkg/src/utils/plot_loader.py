"""Lazy matplotlib loader pinned to the Agg backend.

Why this design:
- Commands that draw nothing never pay the matplotlib import.
- Provide a single place for structured logging and remediation hints.
- Select the non-interactive backend once, before pyplot is first imported.
"""

from __future__ import annotations

import importlib
import logging
from typing import Optional

LOGGER = logging.getLogger("pqcausal.plot_loader")

BACKEND = "Agg"


class PlottingUnavailableError(ImportError):
    """Raised when matplotlib cannot be loaded."""


_pyplot = None
_pyplot_error: Optional[Exception] = None


def get_pyplot():
    """Return matplotlib.pyplot on the Agg backend or raise PlottingUnavailableError."""
    global _pyplot, _pyplot_error

    if _pyplot is not None:
        return _pyplot

    if _pyplot_error is not None:
        raise PlottingUnavailableError("matplotlib previously failed to load") from _pyplot_error

    try:
        matplotlib = importlib.import_module("matplotlib")
        matplotlib.use(BACKEND)
        module = importlib.import_module("matplotlib.pyplot")
    except Exception as exc:  # pragma: no cover - depends on the environment
        _pyplot_error = exc
        LOGGER.error("matplotlib-import-failure", extra={"error": str(exc), "hint": "pip install matplotlib"})
        raise PlottingUnavailableError(
            "matplotlib is unavailable. Install it with `pip install matplotlib`."
        ) from exc

    LOGGER.debug("matplotlib-loaded", extra={"backend": module.get_backend()})
    _pyplot = module
    return module


def get_colors():
    """matplotlib.colors, loaded through the same guarded path as pyplot."""
    get_pyplot()
    return importlib.import_module("matplotlib.colors")


__all__ = ["PlottingUnavailableError", "get_pyplot", "get_colors"]
