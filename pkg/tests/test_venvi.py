from pathlib import Path

import pytest

import venvi


def test_resolve_paths_defaults(tmp_path):
    project_root = tmp_path
    paths = venvi.resolve_paths(project_root)
    assert paths.project_root == project_root
    assert paths.venv_dir == project_root / ".venv"
    assert paths.python.parent == paths.bin_dir
    assert paths.pip.parent == paths.bin_dir


def test_resolve_paths_windows_names(tmp_path):
    project_root = tmp_path
    paths = venvi.resolve_paths(project_root, platform_os="nt")
    assert paths.bin_dir.name == "Scripts"
    assert paths.python.name == "python.exe"
    assert paths.pip.name == "pip.exe"


def test_with_venv_env_prefixes_path(tmp_path):
    paths = venvi.resolve_paths(tmp_path)
    env = venvi.with_venv_env(paths)
    assert env["PATH"].split(venvi.os.pathsep)[0] == str(paths.bin_dir)
    assert env["VIRTUAL_ENV"] == str(paths.venv_dir)


def test_virtualenv_cycle_and_dependency_install(tmp_path):
    project_root = tmp_path / "project"
    project_root.mkdir()
    requirements = project_root / "requirements.txt"
    requirements.write_text("")
    paths = venvi.resolve_paths(project_root)

    venvi.ensure_virtualenv(paths)
    assert paths.python.exists()

    venvi.install_python_dependencies(paths, requirements, upgrade_tools=False)

    env = venvi.with_venv_env(paths)
    assert Path(env["PATH"].split(venvi.os.pathsep)[0]).exists()
    assert env["VIRTUAL_ENV"] == str(paths.venv_dir)


def test_verification_command_flags(tmp_path):
    paths = venvi.resolve_paths(tmp_path)
    command = venvi.verification_command(paths, seed=7)
    assert command[1:] == ["-m", "src.index", "verify-all", "--seed", "7"]
    assert venvi.verification_command(paths, full=True)[-1] == "--full"


def test_parse_args_defaults():
    args = venvi.parse_args([])
    assert args.action == "run"
    assert args.seed == 0
    assert not args.full
    assert venvi.parse_args(["test", "--skip-tests"]).skip_tests


def test_install_requires_existing_requirements(tmp_path):
    paths = venvi.resolve_paths(tmp_path)
    with pytest.raises(FileNotFoundError, match="missing.txt"):
        venvi.install_python_dependencies(paths, tmp_path / "missing.txt", upgrade_tools=False)


def test_summarize_report_lists_failed_suites():
    stdout = 'noise\n{"checks": {"plateau-affine": false, "diamond-oracle": true}, "ok": false, "seed": 3}\n'
    summary = venvi.summarize_report(stdout)
    assert summary == {"ok": False, "failed": ["plateau-affine"], "seed": 3}


def test_summarize_report_rejects_empty_or_garbled_output():
    with pytest.raises(RuntimeError, match="no report"):
        venvi.summarize_report("  \n")
    with pytest.raises(RuntimeError, match="not JSON"):
        venvi.summarize_report("{oops")
