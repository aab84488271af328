"""Product examples: temporal projection as time function and the leaf/level splitting map.

Why this design:
- Keep the time function fixed to the temporal projection so every check is explicit.
- Realize foliations as translates of one shift graph so leaves have a closed-form id.
- Route the leaf-level intersection through the Cauchy fixed point instead of a new solver.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from .cauchy import SpacelikeMap, intersect_fixed_point
from .errors import (
    ConvergenceError,
    DimensionMismatchError,
    LipschitzViolationError,
    PreconditionError,
    SpacelikeInputError,
)
from .lipgraph import LipMap, affine_map
from .pqform import CausalClass, PseudoMetric, classify_segment, classify_vector

LOGGER = logging.getLogger("pqcausal.split")

SPLIT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class FoliationWitness:
    """Leaves L_c = {(c + W(y), y)} for a shift W: R^q -> R^p with constant < 1."""

    shift: LipMap
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.shift.certified_constant >= 1.0 - self.tol:
            raise LipschitzViolationError(
                f"leaves must be timelike graphs; shift constant {self.shift.certified_constant:.12g} is not < 1"
            )

    @property
    def p(self) -> int:
        return self.shift.target_dim

    @property
    def q(self) -> int:
        return self.shift.source_dim

    def leaf_id(self, pt: Any) -> np.ndarray:
        arr = np.asarray(pt, dtype=float).reshape(-1)
        if arr.shape[0] != self.p + self.q:
            raise DimensionMismatchError(f"expected a point of R^{self.p + self.q}")
        return arr[: self.p] - self.shift(arr[self.p :])

    def leaf(self, leaf_id: Any) -> LipMap:
        return self.shift.translated(leaf_id)

    def to_dict(self) -> dict:
        return {"shift": self.shift.to_dict()}


@dataclass(frozen=True, eq=False)
class LevelSetSurface:
    surface: SpacelikeMap

    @property
    def p(self) -> int:
        return self.surface.p

    @property
    def q(self) -> int:
        return self.surface.q


class SpeedBound(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


def check_speed_bound(g: PseudoMetric, v: Any, tol: float = 1e-9) -> SpeedBound:
    """Riemannian speed of a causal vector is at most twice its temporal speed."""
    arr = g._check(v).reshape(-1)
    if classify_vector(g, arr) is CausalClass.SPACELIKE:
        raise SpacelikeInputError("speed bound only applies to causal vectors")
    a, b = np.asarray(g.spatial_weights), np.asarray(g.temporal_weights)
    plus, minus = arr[: g.p], arr[g.p :]
    temporal = float(np.sum(b * minus * minus))
    lhs = float(np.sum(a * plus * plus)) + temporal
    rhs = 2.0 * temporal
    return SpeedBound(lhs, rhs, lhs <= rhs + tol)


def lift_path(section: LipMap, base_path: Any) -> np.ndarray:
    """Lift base points y to (section(y), y); the projection returns the path unchanged."""
    path = np.asarray(base_path, dtype=float)
    if path.size == 0:
        raise PreconditionError("base path must contain at least one point")
    path = path.reshape(len(path), -1) if path.ndim > 1 else path.reshape(-1, section.source_dim)
    if path.shape[1] != section.source_dim:
        raise DimensionMismatchError(f"base path points must lie in R^{section.source_dim}")
    return np.hstack([section.evaluate_many(path), path])


@dataclass
class TimeFunctionReport:
    points: int
    identity_error: float
    worst_margin: float
    spacelike_chords: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.identity_error == 0.0 and self.worst_margin >= -self.tol and self.spacelike_chords == 0

    def to_dict(self) -> dict:
        return {
            "points": self.points,
            "identity_error": self.identity_error,
            "worst_margin": self.worst_margin,
            "spacelike_chords": self.spacelike_chords,
            "ok": self.ok,
        }


def check_cauchy_time_function(
    section: LipMap, base_points: Any, metric: Optional[PseudoMetric] = None, tol: float = 1e-10
) -> TimeFunctionReport:
    """On the lift of a causal section the temporal projection is a bijection that expands length.

    The margin per chord is sum b_j dT_j^2 + Q(chord), which must stay >= -tol.
    """
    lifted = lift_path(section, base_points)
    g = metric or PseudoMetric.standard(section.target_dim, section.source_dim)
    if g.dim != lifted.shape[1]:
        raise DimensionMismatchError("metric does not match the lifted dimension")
    base = np.asarray(base_points, dtype=float).reshape(len(lifted), -1)
    identity_error = float(np.max(np.abs(lifted[:, g.p :] - base))) if len(base) else 0.0
    i, j = np.triu_indices(len(lifted), k=1)
    chords = lifted[j] - lifted[i]
    temporal = np.sum(np.asarray(g.temporal_weights) * chords[:, g.p :] ** 2, axis=1)
    margins = temporal + g.evaluate(chords)
    spacelike = sum(
        classify_segment(g, lifted[a], lifted[b], tol) is CausalClass.SPACELIKE for a, b in zip(i, j)
    )
    worst = float(np.min(margins)) if len(margins) else 0.0
    return TimeFunctionReport(len(lifted), identity_error, worst, int(spacelike), tol)


def reconstruct(fol: FoliationWitness, leaf_id: Any, time: Any) -> np.ndarray:
    c = np.asarray(leaf_id, dtype=float).reshape(-1)
    y = np.asarray(time, dtype=float).reshape(-1)
    return np.concatenate([c + fol.shift(y), y])


def splitting_map(
    fol: FoliationWitness, level: LevelSetSurface, pt: Any, tol: float = SPLIT_TOL
) -> Tuple[np.ndarray, np.ndarray]:
    """pt -> (leaf of pt meets the level set, temporal projection of pt)."""
    if (fol.p, fol.q) != (level.p, level.q):
        raise DimensionMismatchError("foliation and level set live in different signatures")
    arr = np.asarray(pt, dtype=float).reshape(-1)
    c = fol.leaf_id(arr)
    result = intersect_fixed_point(fol.leaf(c), level.surface, x0=arr[fol.p :], tol=tol)
    return result.point, arr[fol.p :].copy()


@dataclass
class SplittingReport:
    samples: int
    max_error: float = 0.0
    collisions: int = 0
    failures: List[str] = field(default_factory=list)
    tol: float = SPLIT_TOL

    @property
    def ok(self) -> bool:
        return not self.failures and self.collisions == 0 and self.max_error <= 10.0 * self.tol

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_error": self.max_error,
            "collisions": self.collisions,
            "failures": list(self.failures),
            "ok": self.ok,
        }


def verify_splitting_bijectivity(
    fol: FoliationWitness,
    level: LevelSetSurface,
    sample_count: int,
    rng_seed: Optional[int] = 0,
    tol: float = SPLIT_TOL,
    spread: float = 5.0,
) -> SplittingReport:
    """Round-trip random points through (leaf id, time) and count key collisions."""
    if sample_count <= 0:
        raise PreconditionError("sample_count must be positive")
    rng = np.random.default_rng(rng_seed)
    points = rng.uniform(-spread, spread, size=(sample_count, fol.p + fol.q))
    report = SplittingReport(samples=sample_count, tol=tol)
    keys = np.full((sample_count, fol.p + fol.q), np.nan)
    for index, pt in enumerate(points):
        try:
            phi, time = splitting_map(fol, level, pt, tol)
        except ConvergenceError as exc:
            report.failures.append(f"sample {index}: {exc}")
            continue
        c = fol.leaf_id(phi)
        keys[index] = np.concatenate([c, time])
        error = float(np.max(np.abs(reconstruct(fol, c, time) - pt)))
        report.max_error = max(report.max_error, error)
    valid = ~np.isnan(keys[:, 0])
    if np.count_nonzero(valid) > 1:
        key_gaps = pdist(keys[valid], "chebyshev")
        input_gaps = pdist(points[valid], "chebyshev")
        report.collisions = int(np.count_nonzero((key_gaps <= tol) & (input_gaps > 10.0 * tol)))
    LOGGER.info(
        "splitting-verified",
        extra={"samples": sample_count, "max_error": report.max_error, "collisions": report.collisions},
    )
    return report


def random_foliation(rng: np.random.Generator, p: int, q: int, constant: float = 0.9) -> FoliationWitness:
    A = rng.standard_normal((p, q))
    A *= constant / max(float(np.linalg.norm(A, 2)), 1e-300)
    return FoliationWitness(affine_map(A, np.zeros(p)))


def random_level_set(rng: np.random.Generator, p: int, q: int, constant: float = 0.9) -> LevelSetSurface:
    B = rng.standard_normal((q, p))
    B *= constant / max(float(np.linalg.norm(B, 2)), 1e-300)
    return LevelSetSurface(SpacelikeMap(affine_map(B, rng.standard_normal(q))))


__all__ = [
    "FoliationWitness",
    "LevelSetSurface",
    "SpeedBound",
    "check_speed_bound",
    "lift_path",
    "TimeFunctionReport",
    "check_cauchy_time_function",
    "reconstruct",
    "splitting_map",
    "SplittingReport",
    "verify_splitting_bijectivity",
    "random_foliation",
    "random_level_set",
]
