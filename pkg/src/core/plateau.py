"""Discrete Plateau problem: maximize the area of 1-Lipschitz sections with fixed boundary.

Why this design:
- Forward-difference Jacobians per cell represent affine sections exactly, so affine cases are error-free.
- Projected gradient ascent with backtracking keeps the recorded area history monotone.
- Pairwise projections run Jacobi-style with fixed ordering so results are bitwise reproducible.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spsla

from .errors import (
    ConvergenceError,
    DegenerateCellError,
    DimensionMismatchError,
    InfeasibleBoundaryError,
    PreconditionError,
)
from .lipgraph import LipMap
from .pqform import PseudoMetric

# Maximal area, minimal surprises.

LOGGER = logging.getLogger("pqcausal.plateau")

NEIGHBORS = "neighbors"
ALL_PAIRS = "all"


@dataclass(frozen=True, eq=False)
class GridBase:
    """Lattice nodes of a compact base B in R^q with boundary mask and stencils."""

    coords: np.ndarray
    boundary: np.ndarray
    spacing: tuple
    cells: np.ndarray
    pairs: np.ndarray
    axis_pairs: np.ndarray
    shape: tuple

    @property
    def q(self) -> int:
        return int(self.coords.shape[1])

    @property
    def node_count(self) -> int:
        return int(self.coords.shape[0])

    @property
    def interior(self) -> np.ndarray:
        return ~self.boundary

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @classmethod
    def from_mask(cls, lo: Sequence[float], spacing: Sequence[float], inside: np.ndarray) -> "GridBase":
        q = inside.ndim
        lo_arr = np.asarray(lo, dtype=float)
        h = np.asarray(spacing, dtype=float)
        lattice = np.argwhere(inside)
        index = -np.ones(inside.shape, dtype=int)
        index[tuple(lattice.T)] = np.arange(len(lattice))
        coords = lo_arr + lattice * h

        def lookup(offset: Sequence[int]) -> np.ndarray:
            shifted = lattice + np.asarray(offset)
            valid = np.all((shifted >= 0) & (shifted < np.asarray(inside.shape)), axis=1)
            out = -np.ones(len(lattice), dtype=int)
            out[valid] = index[tuple(shifted[valid].T)]
            return out

        units = [tuple(int(k == axis) for k in range(q)) for axis in range(q)]
        boundary = np.zeros(len(lattice), dtype=bool)
        for unit in units:
            boundary |= lookup(unit) < 0
            boundary |= lookup(tuple(-u for u in unit)) < 0

        forward = [lookup(unit) for unit in units]
        ok = np.all(np.stack(forward) >= 0, axis=0)
        cells = np.column_stack([np.arange(len(lattice))[ok]] + [f[ok] for f in forward]).astype(int)

        pairs, axis_pairs = [], []
        for offset in itertools.product((-1, 0, 1), repeat=q):
            nonzero = [o for o in offset if o != 0]
            if not nonzero or nonzero[0] < 0:
                continue
            other = lookup(offset)
            mask = other >= 0
            block = np.column_stack([np.flatnonzero(mask), other[mask]])
            pairs.append(block)
            if len(nonzero) == 1:
                axis_pairs.append(block)
        if not np.any(~boundary):
            raise PreconditionError("grid base has no interior nodes")
        return cls(
            coords=coords,
            boundary=boundary,
            spacing=tuple(float(x) for x in h),
            cells=cells,
            pairs=np.vstack(pairs).astype(int),
            axis_pairs=np.vstack(axis_pairs).astype(int),
            shape=tuple(inside.shape),
        )

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float], nodes: int) -> "GridBase":
        lo_arr, hi_arr = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        if lo_arr.shape != hi_arr.shape or not np.all(lo_arr < hi_arr):
            raise PreconditionError("box needs lo < hi componentwise")
        if nodes < 3:
            raise PreconditionError("need at least 3 nodes per axis")
        inside = np.ones((nodes,) * len(lo_arr), dtype=bool)
        return cls.from_mask(lo_arr, (hi_arr - lo_arr) / (nodes - 1), inside)

    @classmethod
    def ball(cls, center: Sequence[float], radius: float, nodes: int) -> "GridBase":
        c = np.asarray(center, dtype=float)
        if not radius > 0:
            raise PreconditionError("ball radius must be positive")
        if nodes < 5:
            raise PreconditionError("need at least 5 nodes per axis for a ball")
        h = 2.0 * radius / (nodes - 1)
        axes = [np.arange(nodes) * h - radius for _ in c]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        inside = np.linalg.norm(mesh, axis=-1) <= radius * (1.0 + 1e-12)
        return cls.from_mask(c - radius, (h,) * len(c), inside)

    def all_pairs(self) -> np.ndarray:
        i, j = np.triu_indices(self.node_count, k=1)
        return np.column_stack([i, j])

    def pair_set(self, which: str) -> np.ndarray:
        if which == NEIGHBORS:
            return self.pairs
        if which == ALL_PAIRS:
            return self.all_pairs()
        raise PreconditionError(f"unknown pair set {which!r}")


@dataclass(frozen=True, eq=False)
class GridSection:
    base: GridBase
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.shape[0] != self.base.node_count:
            raise DimensionMismatchError(f"expected {self.base.node_count} node values, got {vals.shape[0]}")
        object.__setattr__(self, "values", vals)

    @property
    def p(self) -> int:
        return int(self.values.shape[1])

    def with_values(self, values: np.ndarray) -> "GridSection":
        return GridSection(self.base, values)

    @classmethod
    def from_map(cls, base: GridBase, fmap: LipMap) -> "GridSection":
        return cls(base, fmap.evaluate_many(base.coords))


@dataclass(frozen=True)
class PlateauSettings:
    step: float = 1.0
    grad_floor: float = 1e-8
    stop_tol: float = 1e-9
    patience: int = 20
    max_iter: int = 100_000
    feas_tol: float = 1e-10
    max_sweeps: int = 20_000
    shrink: float = 0.5
    max_backtracks: int = 40


@dataclass(frozen=True, eq=False)
class PlateauProblem:
    base: GridBase
    metric: PseudoMetric
    boundary_values: np.ndarray
    settings: PlateauSettings = PlateauSettings()

    def __post_init__(self) -> None:
        vals = np.asarray(self.boundary_values, dtype=float)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.shape[0] != self.base.node_count:
            raise DimensionMismatchError("boundary data must provide one value per node")
        if self.metric.q != self.base.q or self.metric.p != vals.shape[1]:
            raise DimensionMismatchError(
                f"metric ({self.metric.p},{self.metric.q}) does not match base q={self.base.q}, p={vals.shape[1]}"
            )
        object.__setattr__(self, "boundary_values", vals)

    @classmethod
    def from_map(
        cls, base: GridBase, metric: PseudoMetric, fmap: LipMap, settings: Optional[PlateauSettings] = None
    ) -> "PlateauProblem":
        values = np.zeros((base.node_count, fmap.target_dim))
        values[base.boundary] = fmap.evaluate_many(base.coords[base.boundary])
        return cls(base, metric, values, settings or PlateauSettings())


# -- area functional -----------------------------------------------------


def _cell_jacobians(section: GridSection) -> np.ndarray:
    base = section.base
    origin = section.values[base.cells[:, 0]]
    cols = [(section.values[base.cells[:, k + 1]] - origin) / base.spacing[k] for k in range(base.q)]
    return np.stack(cols, axis=-1)


def _induced(section: GridSection, metric: PseudoMetric) -> Tuple[np.ndarray, np.ndarray]:
    if metric.q != section.base.q or metric.p != section.p:
        raise DimensionMismatchError("metric signature does not match the section")
    J = _cell_jacobians(section)
    Ws = np.asarray(metric.spatial_weights)
    Wt = np.diag(metric.temporal_weights)
    M = Wt[None, :, :] - np.einsum("cpi,p,cpj->cij", J, Ws, J)
    return J, M


def cell_min_eigenvalues(section: GridSection, metric: PseudoMetric) -> np.ndarray:
    _, M = _induced(section, metric)
    return np.linalg.eigvalsh(M)[:, 0]


def area(section: GridSection, metric: PseudoMetric) -> float:
    """Sum over cells of sqrt(det(W_t - J^T W_s J)) * cell volume, eigenvalues clamped at 0."""
    _, M = _induced(section, metric)
    eig = np.clip(np.linalg.eigvalsh(M), 0.0, None)
    return float(np.sum(np.sqrt(np.prod(eig, axis=1))) * section.base.cell_volume)


def area_gradient(
    section: GridSection, metric: PseudoMetric, grad_floor: float = 1e-8, strict: bool = True
) -> np.ndarray:
    """Gradient of area() with respect to node values; boundary rows are zero.

    strict=True raises DegenerateCellError on the first cell whose induced
    form has an eigenvalue below grad_floor; otherwise such cells are skipped.
    """
    J, M = _induced(section, metric)
    eig = np.linalg.eigvalsh(M)
    degenerate = eig[:, 0] < grad_floor
    if strict and np.any(degenerate):
        cell = int(np.flatnonzero(degenerate)[0])
        raise DegenerateCellError(f"cell {cell} is degenerate (min eigenvalue {eig[cell, 0]:.3g})", cell)
    good = ~degenerate
    base = section.base
    grad = np.zeros_like(section.values)
    if not np.any(good):
        return grad
    Jg, Mg = J[good], M[good]
    root = np.sqrt(np.prod(eig[good], axis=1))
    Ws = np.asarray(metric.spatial_weights)
    dJ = -root[:, None, None] * np.einsum("p,cpj,cjk->cpk", Ws, Jg, np.linalg.inv(Mg))
    dJ *= base.cell_volume
    cells = base.cells[good]
    for k in range(base.q):
        contribution = dJ[:, :, k] / base.spacing[k]
        np.add.at(grad, cells[:, k + 1], contribution)
        np.add.at(grad, cells[:, 0], -contribution)
    grad[base.boundary] = 0.0
    return grad


# -- feasibility -----------------------------------------------------------


def _pair_excess(values: np.ndarray, coords: np.ndarray, pairs: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    diff = values[pairs[:, 0]] - values[pairs[:, 1]]
    dist = np.linalg.norm(diff, axis=1)
    bound = np.linalg.norm(coords[pairs[:, 0]] - coords[pairs[:, 1]], axis=1)
    return diff, dist, dist - bound


def max_violation(section: GridSection, pair_set: str = NEIGHBORS) -> float:
    pairs = section.base.pair_set(pair_set)
    _, _, excess = _pair_excess(section.values, section.base.coords, pairs)
    return float(max(0.0, np.max(excess))) if len(excess) else 0.0


def check_boundary(base: GridBase, values: np.ndarray, feas_tol: float) -> None:
    nodes = np.flatnonzero(base.boundary)
    i, j = np.triu_indices(len(nodes), k=1)
    pairs = np.column_stack([nodes[i], nodes[j]])
    _, _, excess = _pair_excess(values, base.coords, pairs)
    if len(excess) and np.max(excess) > feas_tol:
        raise InfeasibleBoundaryError(f"boundary data violates 1-Lipschitz by {np.max(excess):.3g}")


def project_lipschitz(
    section: GridSection,
    pair_set: str = NEIGHBORS,
    feas_tol: float = 1e-10,
    max_sweeps: int = 20_000,
) -> GridSection:
    """Enforce |v_i - v_j| <= |x_i - x_j| on the chosen pairs; boundary nodes never move."""
    base = section.base
    pairs = base.pair_set(pair_set)
    fixed = base.boundary
    both_fixed = fixed[pairs[:, 0]] & fixed[pairs[:, 1]]
    values = section.values.copy()
    _, _, excess = _pair_excess(values, base.coords, pairs[both_fixed])
    if len(excess) and np.max(excess) > feas_tol:
        raise InfeasibleBoundaryError(f"boundary pairs violate 1-Lipschitz by {np.max(excess):.3g}")
    pairs = pairs[~both_fixed]
    if len(pairs) == 0:
        return section
    first, second = pairs[:, 0], pairs[:, 1]
    share_first = np.where(fixed[first], 0.0, np.where(fixed[second], 1.0, 0.5))
    share_second = np.where(fixed[second], 0.0, np.where(fixed[first], 1.0, 0.5))
    worst = np.inf
    for sweep in range(max_sweeps):
        diff, dist, excess = _pair_excess(values, base.coords, pairs)
        worst = float(np.max(excess))
        if worst <= feas_tol:
            if sweep:
                LOGGER.debug("projection-converged", extra={"sweeps": sweep, "violation": worst})
                return section.with_values(values)
            return section
        active = excess > 0.0
        unit = diff[active] / dist[active][:, None]
        amount = excess[active][:, None] * unit
        correction = np.zeros_like(values)
        counts = np.zeros(len(values))
        np.add.at(correction, first[active], -share_first[active][:, None] * amount)
        np.add.at(correction, second[active], share_second[active][:, None] * amount)
        np.add.at(counts, first[active], (share_first[active] > 0).astype(float))
        np.add.at(counts, second[active], (share_second[active] > 0).astype(float))
        values += correction / np.maximum(counts, 1.0)[:, None]
        values[fixed] = section.values[fixed]
    LOGGER.warning("projection-not-converged", extra={"max_sweeps": max_sweeps, "violation": worst})
    raise ConvergenceError(
        f"Lipschitz projection did not converge in {max_sweeps} sweeps (violation {worst:.3g})",
        iterations=max_sweeps,
        residual=worst,
    )


def harmonic_initialization(base: GridBase, boundary_values: np.ndarray) -> np.ndarray:
    """Discrete Laplace fill of the interior from the boundary values (axis stencil)."""
    values = np.asarray(boundary_values, dtype=float).copy()
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    interior = np.flatnonzero(base.interior)
    slot = -np.ones(base.node_count, dtype=int)
    slot[interior] = np.arange(len(interior))
    rows, cols, data = [], [], []
    rhs = np.zeros((len(interior), values.shape[1]))
    degree = np.zeros(len(interior))
    for a, b in base.axis_pairs:
        for u, v in ((a, b), (b, a)):
            if slot[u] < 0:
                continue
            degree[slot[u]] += 1.0
            if slot[v] >= 0:
                rows.append(slot[u])
                cols.append(slot[v])
                data.append(-1.0)
            else:
                rhs[slot[u]] += values[v]
    rows.extend(range(len(interior)))
    cols.extend(range(len(interior)))
    data.extend(degree.tolist())
    laplacian = sps.csr_matrix((data, (rows, cols)), shape=(len(interior), len(interior)))
    solution = spsla.spsolve(laplacian.tocsc(), rhs)
    values[interior] = np.asarray(solution).reshape(len(interior), -1)
    return values


# -- solver ----------------------------------------------------------------


@dataclass
class PlateauResult:
    section: GridSection
    area: float
    history: List[float]
    iterations: int
    converged: bool
    neighbor_violation: float
    allpairs_violation: float
    degenerate_cells: int
    repaired: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "coords": self.section.base.coords.tolist(),
            "boundary": self.section.base.boundary.astype(int).tolist(),
            "values": self.section.values.tolist(),
            "area": self.area,
            "iterations": self.iterations,
            "converged": self.converged,
            "history_length": len(self.history),
            "residuals": {
                "neighbors": self.neighbor_violation,
                "all_pairs": self.allpairs_violation,
            },
            "degenerate_cells": self.degenerate_cells,
            "repaired": self.repaired,
            "note": self.note,
        }


def _stalled(history: Sequence[float], patience: int, stop_tol: float) -> bool:
    if len(history) <= patience:
        return False
    recent, earlier = history[-1], history[-1 - patience]
    return (recent - earlier) <= stop_tol * max(abs(recent), 1e-300)


def solve_plateau(problem: PlateauProblem) -> PlateauResult:
    """Projected gradient ascent on the discrete area over feasible sections."""
    cfg = problem.settings
    base, metric = problem.base, problem.metric
    check_boundary(base, problem.boundary_values, cfg.feas_tol)
    try:
        start = harmonic_initialization(base, problem.boundary_values)
        section = project_lipschitz(GridSection(base, start), NEIGHBORS, cfg.feas_tol, cfg.max_sweeps)
    except ConvergenceError as exc:
        raise ConvergenceError(f"initialization failed: {exc}", exc.iterations, exc.residual) from exc

    current = area(section, metric)
    history = [current]
    step = cfg.step
    converged = False
    iterations = 0
    scale = 1.0 / base.cell_volume
    for iterations in range(1, cfg.max_iter + 1):
        grad = area_gradient(section, metric, cfg.grad_floor, strict=False) * scale
        if float(np.max(np.abs(grad))) <= 1e-14:
            converged = True
            break
        accepted = False
        for _ in range(cfg.max_backtracks):
            try:
                trial = project_lipschitz(
                    section.with_values(section.values + step * grad), NEIGHBORS, cfg.feas_tol, cfg.max_sweeps
                )
            except ConvergenceError:
                step *= cfg.shrink
                continue
            trial_area = area(trial, metric)
            if trial_area > current:
                section, current = trial, trial_area
                accepted = True
                break
            step *= cfg.shrink
        if not accepted:
            LOGGER.debug("plateau-step-rejected", extra={"iteration": iterations, "area": current})
            converged = True
            break
        history.append(current)
        step = min(step * 2.0, cfg.step * 1e3)
        if _stalled(history, cfg.patience, cfg.stop_tol):
            converged = True
            break

    repaired = False
    allpairs = max_violation(section, ALL_PAIRS)
    if allpairs > cfg.feas_tol:
        section = project_lipschitz(section, ALL_PAIRS, cfg.feas_tol, cfg.max_sweeps)
        current = area(section, metric)
        allpairs = max_violation(section, ALL_PAIRS)
        repaired = True
        LOGGER.info("plateau-allpairs-repair", extra={"area": current})
    degenerate = int(np.sum(cell_min_eigenvalues(section, metric) < cfg.grad_floor))
    note = ""
    if degenerate:
        note = "degenerate cells present; result is a feasible critical point, not a certified maximizer"
    LOGGER.info(
        "plateau-solved",
        extra={"area": current, "iterations": iterations, "converged": converged, "degenerate": degenerate},
    )
    return PlateauResult(
        section=section,
        area=current,
        history=history,
        iterations=iterations,
        converged=converged,
        neighbor_violation=max_violation(section, NEIGHBORS),
        allpairs_violation=allpairs,
        degenerate_cells=degenerate,
        repaired=repaired,
        note=note,
    )


def brute_force_center_scan(problem: PlateauProblem, samples: int = 20_001) -> Tuple[float, float]:
    """Oracle for grids with one interior node and p = 1: scan, then refine the concave area."""
    base = problem.base
    interior = np.flatnonzero(base.interior)
    if len(interior) != 1 or problem.metric.p != 1:
        raise PreconditionError("brute-force scan needs exactly one interior node and p = 1")
    node = int(interior[0])
    others = np.flatnonzero(base.boundary)
    reach = np.linalg.norm(base.coords[others] - base.coords[node], axis=1)
    fixed = problem.boundary_values[others, 0]
    lo, hi = float(np.max(fixed - reach)), float(np.min(fixed + reach))
    if lo > hi:
        raise InfeasibleBoundaryError("no feasible value for the interior node")

    def value_area(v: float) -> float:
        vals = problem.boundary_values.copy()
        vals[node, 0] = v
        return area(GridSection(base, vals), problem.metric)

    grid = np.linspace(lo, hi, samples)
    areas = np.array([value_area(v) for v in grid])
    best = int(np.argmax(areas))
    left, right = grid[max(best - 1, 0)], grid[min(best + 1, samples - 1)]
    for _ in range(200):
        m1 = left + (right - left) / 3.0
        m2 = right - (right - left) / 3.0
        if value_area(m1) < value_area(m2):
            left = m1
        else:
            right = m2
    center = 0.5 * (left + right)
    return center, value_area(center)


# -- compactness witness -----------------------------------------------------


def extract_limit_section(sequence: Sequence[GridSection], tol: float = 1e-6) -> Tuple[List[int], GridSection]:
    """Diagonal extraction: bisect node values coordinate by coordinate (Bolzano-Weierstrass)."""
    if not sequence:
        raise PreconditionError("sequence must not be empty")
    first = sequence[0]
    base = first.base
    for item in sequence[1:]:
        if item.base is not base and not np.array_equal(item.base.coords, base.coords):
            raise PreconditionError("sections live on different bases")
        if not np.array_equal(item.values[base.boundary], first.values[base.boundary]):
            raise PreconditionError("sections carry different boundary data")
    data = np.stack([s.values[base.interior].reshape(-1) for s in sequence])
    chosen = np.arange(len(sequence))
    for coord in range(data.shape[1]):
        column = data[chosen, coord]
        while column.max() - column.min() > tol:
            mid = 0.5 * (column.max() + column.min())
            lower = column <= mid
            n_low = int(np.sum(lower))
            n_high = len(column) - n_low
            keep = lower if n_low > n_high or (n_low == n_high and lower[0]) else ~lower
            chosen, column = chosen[keep], column[keep]
    limit = first.values.copy()
    limit[base.interior] = data[chosen].mean(axis=0).reshape(-1, first.p)
    LOGGER.debug("limit-extracted", extra={"kept": len(chosen), "total": len(sequence)})
    return chosen.tolist(), GridSection(base, limit)


# -- semicontinuity probe ----------------------------------------------------


@dataclass
class ProbeReport:
    scale: float
    trials: int
    base_area: float
    max_area: float

    @property
    def improvement(self) -> float:
        return self.max_area - self.base_area

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "trials": self.trials,
            "base_area": self.base_area,
            "improvement": self.improvement,
        }


def upper_semicontinuity_probe(
    section: GridSection,
    metric: PseudoMetric,
    perturbation_scale: float,
    trials: int = 32,
    rng_seed: Optional[int] = 0,
    feas_tol: float = 1e-10,
) -> ProbeReport:
    """Best area among feasible sections within sup-distance perturbation_scale."""
    base_area = area(section, metric)
    if perturbation_scale <= 0 or trials <= 0:
        return ProbeReport(max(perturbation_scale, 0.0), 0, base_area, base_area)
    rng = np.random.default_rng(rng_seed)
    best = base_area
    interior = section.base.interior
    for _ in range(trials):
        noise = np.zeros_like(section.values)
        noise[interior] = rng.uniform(-perturbation_scale, perturbation_scale, size=(int(interior.sum()), section.p))
        try:
            candidate = project_lipschitz(section.with_values(section.values + noise), NEIGHBORS, feas_tol)
        except ConvergenceError:
            continue
        offset = candidate.values - section.values
        reach = float(np.max(np.abs(offset)))
        if reach > perturbation_scale:
            candidate = section.with_values(section.values + offset * (perturbation_scale / reach))
        best = max(best, area(candidate, metric))
    return ProbeReport(perturbation_scale, trials, base_area, best)


def semicontinuity_profile(
    section: GridSection,
    metric: PseudoMetric,
    scales: Sequence[float] = (1e-1, 1e-2, 1e-3),
    trials: int = 32,
    rng_seed: Optional[int] = 0,
) -> List[ProbeReport]:
    return [upper_semicontinuity_probe(section, metric, s, trials, rng_seed) for s in scales]


__all__ = [
    "NEIGHBORS",
    "ALL_PAIRS",
    "GridBase",
    "GridSection",
    "PlateauSettings",
    "PlateauProblem",
    "PlateauResult",
    "area",
    "area_gradient",
    "cell_min_eigenvalues",
    "max_violation",
    "check_boundary",
    "project_lipschitz",
    "harmonic_initialization",
    "solve_plateau",
    "brute_force_center_scan",
    "extract_limit_section",
    "ProbeReport",
    "upper_semicontinuity_probe",
    "semicontinuity_profile",
]
