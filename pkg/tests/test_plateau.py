"""Tests for the discrete maximal-section solver."""

import numpy as np
import pytest

from src.core.errors import DegenerateCellError, DimensionMismatchError, InfeasibleBoundaryError, PreconditionError
from src.core.plateau import (
    ALL_PAIRS,
    GridBase,
    GridSection,
    PlateauProblem,
    PlateauSettings,
    area,
    area_gradient,
    brute_force_center_scan,
    check_boundary,
    extract_limit_section,
    harmonic_initialization,
    max_violation,
    project_lipschitz,
    semicontinuity_profile,
    solve_plateau,
    upper_semicontinuity_probe,
)
from src.core.pqform import PseudoMetric


@pytest.fixture
def base5():
    return GridBase.box((0.0, 0.0), (1.0, 1.0), 5)


@pytest.fixture
def g12():
    return PseudoMetric.standard(1, 2)


def _affine(base, slope):
    return (slope * base.coords[:, 0]).reshape(-1, 1)


def _boundary_only(base, values):
    out = np.zeros_like(values)
    out[base.boundary] = values[base.boundary]
    return out


def test_box_layout(base5):
    assert base5.node_count == 25
    assert int(base5.interior.sum()) == 9
    assert base5.cell_volume == pytest.approx(1.0 / 16.0)
    assert len(base5.cells) == 16
    with pytest.raises(PreconditionError):
        GridBase.box((0.0,), (1.0,), 2)


def test_ball_layout():
    ball = GridBase.ball((0.0, 0.0), 1.0, 7)
    assert np.all(np.linalg.norm(ball.coords, axis=1) <= 1.0 + 1e-9)
    assert ball.interior.any() and ball.boundary.any()
    with pytest.raises(PreconditionError):
        GridBase.ball((0.0, 0.0), 1.0, 4)


@pytest.mark.parametrize("slope,expected", [(0.0, 1.0), (0.6, 0.8)])
def test_area_of_affine_sections(base5, g12, slope, expected):
    assert area(GridSection(base5, _affine(base5, slope)), g12) == pytest.approx(expected)


def test_area_of_lightlike_section(base5, g12):
    assert area(GridSection(base5, _affine(base5, 1.0)), g12) == pytest.approx(0.0, abs=1e-6)


def test_area_checks_signature(base5):
    with pytest.raises(DimensionMismatchError):
        area(GridSection(base5, _affine(base5, 0.5)), PseudoMetric.standard(2, 2))


def test_gradient_zero_for_constant(base5, g12):
    grad = area_gradient(GridSection(base5, np.full(25, 0.4)), g12)
    assert np.allclose(grad, 0.0)


def test_gradient_degenerate_cell(base5, g12):
    with pytest.raises(DegenerateCellError) as info:
        area_gradient(GridSection(base5, _affine(base5, 1.0)), g12)
    assert info.value.cell_index == 0
    relaxed = area_gradient(GridSection(base5, _affine(base5, 1.0)), g12, strict=False)
    assert np.allclose(relaxed, 0.0)


def test_gradient_matches_finite_differences(base5, g12):
    x, y = base5.coords[:, 0], base5.coords[:, 1]
    values = 0.2 * np.sin(2.0 * x) * np.cos(y) + 0.1 * y
    section = GridSection(base5, values)
    grad = area_gradient(section, g12)
    assert np.all(grad[base5.boundary] == 0.0)
    eps = 1e-6
    for node in np.flatnonzero(base5.interior):
        up, down = values.copy(), values.copy()
        up[node] += eps
        down[node] -= eps
        fd = (area(GridSection(base5, up), g12) - area(GridSection(base5, down), g12)) / (2.0 * eps)
        assert grad[node, 0] == pytest.approx(fd, abs=1e-7)


def test_projection_keeps_feasible_section(base5):
    section = GridSection(base5, np.zeros(25))
    assert project_lipschitz(section) is section


def test_projection_splits_single_violation(base5):
    delta = 0.01
    values = np.zeros(25)
    a, b = 6, 11
    values[a], values[b] = 0.125 + delta, -(0.125 + delta)
    projected = project_lipschitz(GridSection(base5, values))
    assert projected.values[a, 0] == pytest.approx(0.125, abs=1e-12)
    assert projected.values[b, 0] == pytest.approx(-0.125, abs=1e-12)
    assert max_violation(projected) <= 1e-10


def test_projection_rejects_infeasible_boundary(base5):
    values = np.zeros(25)
    values[0] = 5.0
    with pytest.raises(InfeasibleBoundaryError):
        project_lipschitz(GridSection(base5, values))
    with pytest.raises(InfeasibleBoundaryError):
        check_boundary(base5, values.reshape(-1, 1), 1e-10)


def test_harmonic_initialization_reproduces_affine_on_ball():
    ball = GridBase.ball((0.0, 0.0), 1.0, 9)
    affine = (0.3 * ball.coords[:, 0] + 0.2 * ball.coords[:, 1]).reshape(-1, 1)
    filled = harmonic_initialization(ball, _boundary_only(ball, affine))
    assert np.allclose(filled, affine, atol=1e-12)


def test_solver_constant_boundary(base5, g12):
    problem = PlateauProblem(base5, g12, np.full((25, 1), 0.3))
    result = solve_plateau(problem)
    assert result.converged
    assert result.area == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(result.section.values, 0.3)


def test_solver_affine_single_interior_node(g12):
    base = GridBase.box((0.0, 0.0), (1.0, 1.0), 3)
    problem = PlateauProblem(base, g12, _boundary_only(base, _affine(base, 0.5)))
    result = solve_plateau(problem)
    assert result.area == pytest.approx(np.sqrt(0.75), abs=1e-9)
    center, best = brute_force_center_scan(problem)
    assert center == pytest.approx(0.25, abs=1e-6)
    assert best == pytest.approx(result.area, abs=1e-9)


def test_solver_lightlike_boundary(base5, g12):
    problem = PlateauProblem(base5, g12, _boundary_only(base5, _affine(base5, 1.0)))
    result = solve_plateau(problem)
    assert result.area == pytest.approx(0.0, abs=1e-6)
    # Rows are pinned by their endpoints: v = x up to feas_tol per grid step.
    feas = problem.settings.feas_tol
    assert np.allclose(result.section.values, _affine(base5, 1.0), rtol=0.0, atol=4 * feas)
    assert result.allpairs_violation <= feas
    assert result.degenerate_cells > 0
    assert result.note


def test_solver_ascends_and_stays_feasible(base5, g12):
    boundary = (0.5 * np.abs(base5.coords[:, 0] - 0.5)).reshape(-1, 1)
    settings = PlateauSettings(max_iter=200)
    problem = PlateauProblem(base5, g12, _boundary_only(base5, boundary), settings)
    result = solve_plateau(problem)
    history = np.asarray(result.history)
    assert np.all(np.diff(history) >= 0.0)
    assert result.area >= history[0] - 1e-12
    assert np.array_equal(result.section.values[base5.boundary], boundary[base5.boundary])
    assert result.allpairs_violation <= settings.feas_tol
    assert result.to_dict()["residuals"]["all_pairs"] == result.allpairs_violation


def test_solver_rejects_infeasible_boundary(base5, g12):
    values = np.zeros((25, 1))
    values[0] = 5.0
    with pytest.raises(InfeasibleBoundaryError):
        solve_plateau(PlateauProblem(base5, g12, values))


def test_brute_force_needs_single_interior_node(base5, g12):
    with pytest.raises(PreconditionError):
        brute_force_center_scan(PlateauProblem(base5, g12, np.zeros((25, 1))))


def test_extract_limit_constant_sequence(base5):
    section = GridSection(base5, _affine(base5, 0.2))
    indices, limit = extract_limit_section([section] * 4)
    assert indices == [0, 1, 2, 3]
    assert np.allclose(limit.values, section.values)


def test_extract_limit_alternating_sequence(base5):
    first = GridSection(base5, np.zeros(25))
    bumped = np.zeros(25)
    bumped[12] = 0.1
    second = GridSection(base5, bumped)
    indices, limit = extract_limit_section([first, second, first, second, first, second])
    assert indices == [0, 2, 4]
    assert np.array_equal(limit.values, first.values)


def test_extract_limit_rejects_mixed_boundaries(base5):
    other = np.zeros(25)
    other[0] = 0.1
    with pytest.raises(PreconditionError):
        extract_limit_section([GridSection(base5, np.zeros(25)), GridSection(base5, other)])
    with pytest.raises(PreconditionError):
        extract_limit_section([])


def test_semicontinuity_probe(base5, g12):
    flat = GridSection(base5, np.zeros(25))
    assert upper_semicontinuity_probe(flat, g12, 0.0).improvement == 0.0
    report = upper_semicontinuity_probe(flat, g12, 1e-2, trials=8)
    assert report.improvement <= 1e-12
    profile = semicontinuity_profile(flat, g12, scales=(1e-1, 1e-2), trials=4)
    assert [r.scale for r in profile] == [1e-1, 1e-2]
    assert max_violation(flat, ALL_PAIRS) == 0.0
