"""Solver defaults loaded from settings.json.

Why this design:
- Validate the file once with pydantic so numeric modules receive typed values.
- Fall back to defaults on a missing or broken file instead of aborting a run.
- Keep core modules free of any settings dependency; callers pass values explicitly.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError

from ..core.plateau import PlateauSettings

LOGGER = logging.getLogger("pqcausal.settings")

SETTINGS_FILE = "settings.json"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PqformSection(_Section):
    tol: float = Field(default=1e-12, ge=0.0)


class KirszbraunSection(_Section):
    tol: PositiveFloat = 1e-9
    max_iter: PositiveInt = 100_000


class FixedPointSection(_Section):
    tol: PositiveFloat = 1e-10
    max_iter: PositiveInt = 10_000
    trials: PositiveInt = 100


class DiamondSection(_Section):
    sphere_samples: PositiveInt = 1000
    boundary_band: float = Field(default=1e-6, ge=0.0)
    fd_step: PositiveFloat = 1e-5
    resolution: PositiveInt = 64
    extent: PositiveFloat = 1.25


class PlateauSection(_Section):
    step: PositiveFloat = 1.0
    grad_floor: PositiveFloat = 1e-8
    stop_tol: PositiveFloat = 1e-9
    patience: PositiveInt = 20
    max_iter: PositiveInt = 100_000
    feas_tol: PositiveFloat = 1e-10
    max_sweeps: PositiveInt = 20_000

    def to_solver(self, overrides: Optional[dict] = None) -> PlateauSettings:
        values = self.model_dump()
        values.update(overrides or {})
        merged = PlateauSection.model_validate(values)
        return PlateauSettings(**merged.model_dump())


class SplitSection(_Section):
    tol: PositiveFloat = 1e-10
    samples: PositiveInt = 1000


class Settings(_Section):
    pqform: PqformSection = PqformSection()
    kirszbraun: KirszbraunSection = KirszbraunSection()
    fixed_point: FixedPointSection = FixedPointSection()
    diamond: DiamondSection = DiamondSection()
    plateau: PlateauSection = PlateauSection()
    split: SplitSection = SplitSection()


def settings_path() -> Path:
    return Path(os.getcwd()) / SETTINGS_FILE


def load_settings(path: Union[str, Path, None] = None) -> Settings:
    target = Path(path) if path is not None else settings_path()
    if not target.exists():
        return Settings()
    try:
        data = json.loads(target.read_text(encoding="utf-8"))
        return Settings.model_validate(data)
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        LOGGER.warning("settings-invalid", extra={"path": str(target), "error": str(exc)})
        return Settings()


def save_settings(settings: Settings, path: Union[str, Path, None] = None) -> Path:
    target = Path(path) if path is not None else settings_path()
    temp_path = target.with_suffix(".tmp")
    temp_path.write_text(json.dumps(settings.model_dump(), indent=2, sort_keys=True), encoding="utf-8")
    temp_path.replace(target)
    return target


__all__ = [
    "Settings",
    "PqformSection",
    "KirszbraunSection",
    "FixedPointSection",
    "DiamondSection",
    "PlateauSection",
    "SplitSection",
    "load_settings",
    "save_settings",
    "settings_path",
]
