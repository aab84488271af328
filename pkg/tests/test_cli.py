"""End-to-end tests of the command-line front end."""

import json

import pytest

from src.ui.cli import EXIT_DATA, EXIT_OK, EXIT_PRECONDITION, EXIT_USAGE, dispatch


@pytest.fixture
def run(tmp_path, capsys):
    def _run(*argv):
        code = dispatch([*argv, "--settings", str(tmp_path / "settings.json")])
        out = capsys.readouterr().out.strip().splitlines()
        return code, json.loads(out[-1]) if out else None

    return _run


def _instance(path, kind, payload):
    path.write_text(json.dumps({"version": 1, "kind": kind, "payload": payload}), encoding="utf-8")
    return str(path)


def test_classify_lightlike(run):
    code, report = run("classify", "--signature", "1,1", "--vector", "1,1")
    assert code == EXIT_OK
    assert report["result"] == {"class": "Lightlike"}
    assert report["ok"] is True
    assert report["command"][0] == "classify"


def test_classify_subspace_and_segment(run):
    code, report = run("classify", "--signature", "2,2", "--subspace", "0,0,1,0;1,0,1,0")
    assert code == EXIT_OK and report["result"]["class"] == "Mixed"
    code, report = run("classify", "--signature", "1,2", "--segment", "0,0,0;0,2,0")
    assert report["result"]["class"] == "Timelike"


def test_classify_without_query_is_precondition(run):
    code, report = run("classify", "--signature", "1,1")
    assert code == EXIT_PRECONDITION
    assert "error" in report


def test_unknown_command_is_usage_error(capsys):
    assert dispatch(["teleport"]) == EXIT_USAGE
    assert capsys.readouterr().out == ""


def test_missing_problem_file(run, tmp_path):
    code, report = run("plateau", "--problem", str(tmp_path / "absent.json"))
    assert code == EXIT_DATA
    assert report["ok"] is False


def test_plateau_writes_solution(run, tmp_path):
    problem = _instance(
        tmp_path / "problem.json",
        "problem",
        {
            "base": {"kind": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0], "nodes": 3},
            "boundary": {"affine": {"matrix": [[0.5, 0.0]], "offset": [0.0]}},
        },
    )
    solution = tmp_path / "solution.json"
    code, report = run("plateau", "--problem", problem, "--out", str(solution), "--svg", str(tmp_path / "s.svg"))
    assert code == EXIT_OK
    assert report["result"]["area"] == pytest.approx(0.75 ** 0.5, abs=1e-9)
    saved = json.loads(solution.read_text(encoding="utf-8"))
    assert len(saved["values"]) == 9
    assert (tmp_path / "s.svg").exists()


def test_split_point(run, tmp_path):
    foliation = _instance(tmp_path / "fol.json", "foliation", {"shift": {"affine": {"matrix": [[0.5]], "offset": [0.0]}}})
    surface = _instance(tmp_path / "surf.json", "surface", {"affine": {"matrix": [[0.0]], "offset": [0.0]}})
    code, report = run("split", "--foliation", foliation, "--surface", surface, "--point", "1,2")
    assert code == EXIT_OK
    assert report["result"]["phi"] == pytest.approx([0.0, 0.0], abs=1e-9)
    assert report["result"]["time"] == [2.0]
    assert report["result"]["reconstructed"] == pytest.approx([1.0, 2.0])


def test_extend_writes_augmented_samples(run, tmp_path):
    samples = _instance(
        tmp_path / "samples.json",
        "samples",
        {"samples": {"sources": [[0.0, 0.0], [2.0, 0.0]], "targets": [[0.0], [1.0]]}},
    )
    out = tmp_path / "augmented.json"
    code, report = run("extend", "--samples", samples, "--query", "1,0", "--out", str(out))
    assert code == EXIT_OK
    assert report["result"]["values"][0][0] == pytest.approx(0.5, abs=1e-8)
    assert len(json.loads(out.read_text(encoding="utf-8"))["payload"]["samples"]["sources"]) == 3


def test_extend_honours_zero_lipschitz(run, tmp_path):
    flat = _instance(
        tmp_path / "flat.json",
        "samples",
        {"samples": {"sources": [[0.0, 0.0], [2.0, 0.0]], "targets": [[2.0], [2.0]]}},
    )
    code, report = run("extend", "--samples", flat, "--query", "1,1", "--lipschitz", "0")
    assert code == EXIT_OK
    assert report["result"]["lipschitz"] == 0.0
    assert report["result"]["values"] == [[2.0]]
    sloped = _instance(
        tmp_path / "sloped.json",
        "samples",
        {"samples": {"sources": [[0.0, 0.0], [2.0, 0.0]], "targets": [[0.0], [1.0]]}},
    )
    code, _ = run("extend", "--samples", sloped, "--query", "1,0", "--lipschitz", "0")
    assert code == EXIT_PRECONDITION


def test_diamond_point_and_outputs(run, tmp_path):
    code, report = run(
        "diamond", "--p", "1", "--q", "1", "--point", "0.3,0.3", "--resolution", "8",
        "--out", str(tmp_path / "d.svg"), "--csv", str(tmp_path / "d.csv"),
    )
    assert code == EXIT_OK
    assert report["result"]["oracle"] is True
    assert report["result"]["member"] is True
    assert report["result"]["slice"]["cells"] == 64
    assert (tmp_path / "d.csv").read_text(encoding="utf-8").startswith("x_plus_1")


def test_verify_split_random(run):
    code, report = run("verify-split", "--samples", "20", "--p", "1", "--q", "2", "--seed", "3")
    assert code == EXIT_OK
    assert report["checks"] == {"verify-split": True}
    assert report["seed"] == 3
