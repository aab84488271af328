import json

import pytest
from pydantic import ValidationError

from src.utils.settings import PlateauSection, Settings, load_settings, save_settings


def test_missing_file_gives_defaults(tmp_path):
    settings = load_settings(tmp_path / "settings.json")
    assert settings == Settings()
    assert settings.fixed_point.tol == 1e-10
    assert settings.plateau.patience == 20


def test_invalid_file_falls_back(tmp_path, caplog):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"plateau": {"step": -1.0}}), encoding="utf-8")
    with caplog.at_level("WARNING", logger="pqcausal.settings"):
        settings = load_settings(path)
    assert settings == Settings()
    assert any(record.getMessage() == "settings-invalid" for record in caplog.records)


def test_save_and_reload(tmp_path):
    path = tmp_path / "settings.json"
    custom = Settings(plateau=PlateauSection(max_iter=42))
    save_settings(custom, path)
    assert load_settings(path).plateau.max_iter == 42


def test_unknown_keys_are_rejected():
    with pytest.raises(ValidationError):
        Settings.model_validate({"camera": {}})


def test_plateau_overrides():
    solver = PlateauSection(step=0.5).to_solver({"patience": 3})
    assert solver.step == 0.5
    assert solver.patience == 3
    with pytest.raises(ValidationError):
        PlateauSection().to_solver({"unknown": 1})
