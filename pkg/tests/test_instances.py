"""Tests for instance files: schemas, loading, saving and builders."""

import json

import numpy as np
import pytest

from src.core.errors import InstanceFormatError, LipschitzViolationError
from src.services.instances import (
    build_foliation,
    build_map,
    build_metric,
    build_problem,
    build_surface,
    dump_json,
    load_instance,
    parse_instance,
    save_instance,
)
from src.utils.settings import PlateauSection


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_save_then_load_metric(tmp_path):
    target = save_instance(tmp_path / "g.json", "metric", {"p": 2, "q": 1, "spatial_weights": [1.0, 2.0]})
    text = target.read_text(encoding="utf-8")
    assert text.endswith("\n")
    assert json.loads(text)["version"] == 1
    g = build_metric(load_instance(target, "metric"))
    assert (g.p, g.q) == (2, 1)
    assert g.spatial_weights == (1.0, 2.0)
    assert g.temporal_weights == (1.0,)


def test_bare_payload_is_accepted():
    payload = parse_instance({"affine": {"matrix": [[0.5]], "offset": [1.0]}}, "surface")
    assert build_map(payload)((2.0,))[0] == pytest.approx(2.0)


def test_missing_file_and_bad_json(tmp_path):
    with pytest.raises(InstanceFormatError):
        load_instance(tmp_path / "absent.json", "metric")
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(InstanceFormatError):
        load_instance(broken, "metric")


def test_kind_mismatch_and_schema_errors(tmp_path):
    path = _write(tmp_path / "m.json", {"version": 1, "kind": "metric", "payload": {"p": 1, "q": 1}})
    with pytest.raises(InstanceFormatError):
        load_instance(path, "problem")
    with pytest.raises(InstanceFormatError):
        parse_instance({"p": 0, "q": 1}, "metric")
    with pytest.raises(InstanceFormatError):
        parse_instance({"p": 1, "q": 1, "extra": True}, "metric")
    with pytest.raises(InstanceFormatError):
        parse_instance({"version": 2, "kind": "metric", "payload": {"p": 1, "q": 1}}, "metric")


def test_map_payload_needs_one_representation():
    with pytest.raises(InstanceFormatError):
        parse_instance({}, "samples")
    both = {
        "affine": {"matrix": [[0.5]], "offset": [0.0]},
        "samples": {"sources": [[0.0]], "targets": [[0.0]]},
    }
    with pytest.raises(InstanceFormatError):
        parse_instance(both, "samples")


def test_save_validates_before_writing(tmp_path):
    with pytest.raises(InstanceFormatError):
        save_instance(tmp_path / "bad.json", "metric", {"p": "two"})
    assert not (tmp_path / "bad.json").exists()


def test_samples_map_uses_data_constant():
    payload = parse_instance({"samples": {"sources": [[0.0, 0.0], [2.0, 0.0]], "targets": [[0.0], [1.0]]}}, "samples")
    fmap = build_map(payload)
    assert fmap.certified_constant == pytest.approx(0.5)
    assert fmap((1.0, 0.0))[0] == pytest.approx(0.5, abs=1e-8)


def test_surface_and_foliation_builders():
    level = build_surface(parse_instance({"affine": {"matrix": [[0.0]], "offset": [0.0]}}, "surface"))
    assert (level.p, level.q) == (1, 1)
    fol = build_foliation(parse_instance({"shift": {"affine": {"matrix": [[0.5]], "offset": [0.0]}}}, "foliation"))
    assert np.allclose(fol.leaf_id((1.0, 2.0)), (0.0,))
    with pytest.raises(LipschitzViolationError):
        build_surface(parse_instance({"affine": {"matrix": [[1.0]], "offset": [0.0]}}, "surface"))


def test_problem_builder_merges_solver_block():
    payload = parse_instance(
        {
            "base": {"kind": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0], "nodes": 5},
            "boundary": {"affine": {"matrix": [[0.5, 0.0]], "offset": [0.0]}},
            "solver": {"patience": 5},
        },
        "problem",
    )
    problem = build_problem(payload, PlateauSection(max_iter=50))
    assert problem.settings.patience == 5
    assert problem.settings.max_iter == 50
    assert (problem.metric.p, problem.metric.q) == (1, 2)
    assert problem.boundary_values.shape == (25, 1)


def test_problem_builder_rejects_bad_solver_block():
    payload = parse_instance(
        {
            "base": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0, "nodes": 7},
            "boundary": {"affine": {"matrix": [[0.0, 0.0]], "offset": [0.0]}},
            "solver": {"patience": -1},
        },
        "problem",
    )
    with pytest.raises(InstanceFormatError):
        build_problem(payload)


def test_dump_json_is_stable():
    assert dump_json({"b": 1, "a": [1, 2]}) == dump_json({"a": [1, 2], "b": 1})
