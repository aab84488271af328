"""Tests for the lazy matplotlib loader."""

import pytest

from src.utils import plot_loader

pytest.importorskip("matplotlib")


def test_pyplot_runs_on_agg_and_is_cached():
    plt = plot_loader.get_pyplot()
    assert plt.get_backend().lower() == plot_loader.BACKEND.lower()
    assert plot_loader.get_pyplot() is plt
    assert hasattr(plot_loader.get_colors(), "LinearSegmentedColormap")


def test_cached_failure_raises_with_hint(monkeypatch):
    monkeypatch.setattr(plot_loader, "_pyplot", None)
    monkeypatch.setattr(plot_loader, "_pyplot_error", ImportError("no display"))
    with pytest.raises(plot_loader.PlottingUnavailableError):
        plot_loader.get_pyplot()
