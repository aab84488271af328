"""Small-count runs of the invariant suites."""

import pytest

from src.core.errors import PqCausalError
from src.services.verification import (
    DESK_COUNTS,
    DIAMOND_SIGNATURES,
    FULL_COUNTS,
    CheckResult,
    area_gradient_suite,
    compactness_suite,
    conformality_suite,
    diamond_oracle_suite,
    fixed_point_suite,
    graph_characterization_suite,
    kirszbraun_suite,
    plateau_affine_suite,
    plateau_constant_suite,
    run_suites,
    splitting_suite,
    suite_plan,
)


@pytest.mark.parametrize(
    "suite",
    [
        lambda: graph_characterization_suite(0, 20),
        lambda: kirszbraun_suite(0, 3, queries=3, max_points=10),
        lambda: fixed_point_suite(0, 10),
        lambda: diamond_oracle_suite(0, 20, sphere_samples=200),
        lambda: conformality_suite(0, 5),
        lambda: area_gradient_suite(0, 2),
        lambda: compactness_suite(0, 20),
        lambda: splitting_suite(0, 1, 20, 100),
        lambda: plateau_constant_suite(0, nodes=5),
        lambda: plateau_affine_suite(0, nodes=5, scan_samples=2001),
    ],
)
def test_suites_pass_on_small_counts(suite):
    result = suite()
    assert result.passed, result.to_dict()


def test_run_suites_records_crashes():
    def broken(seed):
        raise PqCausalError("boom")

    plan = {"fine": lambda seed: CheckResult("fine", 1), "broken": broken}
    report = run_suites(plan, seed=5, command=["verify-all"])
    assert report.checks == {"fine": True, "broken": False}
    assert report.result["broken"]["error"] == "boom"
    assert not report.ok
    assert report.to_dict()["seed"] == 5


def test_suite_plan_covers_both_count_sets():
    assert set(suite_plan()) == set(suite_plan(full=True))
    assert set(DESK_COUNTS) == set(FULL_COUNTS)
    assert all(DESK_COUNTS[k] <= FULL_COUNTS[k] for k in DESK_COUNTS)


def test_fixed_point_suite_checks_every_step():
    result = fixed_point_suite(1, 12)
    assert result.passed, result.to_dict()
    assert result.detail["slow_steps"] == 0
    assert 0.0 < result.detail["max_step_ratio"] <= 0.9 + 1e-2


def test_diamond_oracle_suite_covers_signatures():
    result = diamond_oracle_suite(2, 10, sphere_samples=200)
    assert result.passed, result.to_dict()
    assert result.trials == 10 * len(DIAMOND_SIGNATURES)
    assert (3, 2) in DIAMOND_SIGNATURES and (1, 1) not in DIAMOND_SIGNATURES
