"""Inextendible causal maps as graphs of Lipschitz maps R^q -> R^p.

Why this design:
- Represent infinite graphs by finite sample witnesses plus lazy Kirszbraun evaluation.
- Certify the Lipschitz constant once at construction and carry it with the map.
- Keep the extension solver deterministic: fixed initial guess, fixed projection order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.distance import cdist, pdist

from .errors import ConvergenceError, DimensionMismatchError, LipschitzViolationError, PreconditionError
from .pqform import DEFAULT_TOL, PseudoMetric

LOGGER = logging.getLogger("pqcausal.lipgraph")

KIRSZBRAUN_TOL = 1e-9
KIRSZBRAUN_MAX_ITER = 100_000
KIRSZBRAUN_STALL_WINDOW = 500
KIRSZBRAUN_POLISH_ITER = 500


def _as_rows(arr: Any) -> np.ndarray:
    """Scalars and flat lists become one-column rows."""
    out = np.asarray(arr, dtype=float)
    if out.ndim == 0:
        return out.reshape(1, 1)
    if out.ndim == 1:
        return out.reshape(-1, 1)
    return out


def _frozen(arr: Any) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GraphSamples:
    """Finite witness {x_i -> y_i} of a graph; sources in R^q, targets in R^p."""

    sources: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        src = _as_rows(self.sources)
        tgt = _as_rows(self.targets)
        if src.shape[0] < 1:
            raise PreconditionError("at least one sample is required")
        if src.shape[0] != tgt.shape[0]:
            raise DimensionMismatchError(f"{src.shape[0]} sources but {tgt.shape[0]} targets")
        if src.shape[0] > 1 and np.min(pdist(src)) == 0.0:
            raise PreconditionError("duplicate sources in graph samples")
        object.__setattr__(self, "sources", _frozen(src))
        object.__setattr__(self, "targets", _frozen(tgt))

    @property
    def count(self) -> int:
        return int(self.sources.shape[0])

    @property
    def source_dim(self) -> int:
        return int(self.sources.shape[1])

    @property
    def target_dim(self) -> int:
        return int(self.targets.shape[1])

    def with_sample(self, x: Any, y: Any) -> "GraphSamples":
        return GraphSamples(np.vstack([self.sources, x]), np.vstack([self.targets, y]))

    def to_dict(self) -> dict:
        return {"sources": self.sources.tolist(), "targets": self.targets.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "GraphSamples":
        return cls(np.asarray(data["sources"], dtype=float), np.asarray(data["targets"], dtype=float))


class GraphMode(str, Enum):
    CAUSAL = "Causal"
    TIMELIKE = "Timelike"


def lipschitz_constant(samples: GraphSamples) -> float:
    if samples.count == 1:
        return 0.0
    dx = pdist(samples.sources)
    dy = pdist(samples.targets)
    return float(np.max(dy / dx))


def lift_samples(samples: GraphSamples) -> np.ndarray:
    """Graph points (y_i, x_i) in R^{p+q}, spatial block first."""
    return np.hstack([samples.targets, samples.sources])


def samples_from_points(points: Any, p: int) -> GraphSamples:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return GraphSamples(pts[:, p:], pts[:, :p])


def is_causal_position(g: PseudoMetric, points: Any, strict: bool = False, tol: float = DEFAULT_TOL) -> bool:
    pts = g._check(np.atleast_2d(np.asarray(points, dtype=float)))
    n = pts.shape[0]
    if n <= 1:
        return True
    i, j = np.triu_indices(n, k=1)
    delta = pts[j] - pts[i]
    values = g.evaluate(delta)
    band = tol * np.sum(delta * delta, axis=1)
    if strict:
        return bool(np.all(values < -band))
    return bool(np.all(values <= band))


def _initial_guess(distances: np.ndarray, targets: np.ndarray) -> np.ndarray:
    weights = 1.0 / distances
    return weights @ targets / np.sum(weights)


def _ball_residual(y: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> float:
    return float(np.max(np.linalg.norm(y - centers, axis=1) - radii))


def _minimax_polish(centers: np.ndarray, radii: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Minimize max_i |y - c_i| - r_i in epigraph form with SLSQP."""
    dim = centers.shape[1]
    unit = np.zeros(dim + 1)
    unit[-1] = 1.0

    def slack(z: np.ndarray) -> np.ndarray:
        return z[-1] + radii - np.linalg.norm(z[:dim] - centers, axis=1)

    def slack_jac(z: np.ndarray) -> np.ndarray:
        diff = z[:dim] - centers
        dist = np.linalg.norm(diff, axis=1)
        safe = np.where(dist > 0.0, dist, 1.0)
        return np.hstack([-diff / safe[:, None], np.ones((len(centers), 1))])

    z0 = np.append(start, _ball_residual(start, centers, radii))
    solution = minimize(
        lambda z: z[-1],
        z0,
        jac=lambda z: unit,
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": slack, "jac": slack_jac}],
        options={"ftol": 1e-16, "maxiter": KIRSZBRAUN_POLISH_ITER},
    )
    return np.asarray(solution.x[:dim], dtype=float)


def kirszbraun_extend(
    samples: GraphSamples,
    lipschitz: float,
    x: Any,
    tol: float = KIRSZBRAUN_TOL,
    max_iter: int = KIRSZBRAUN_MAX_ITER,
    check: bool = True,
) -> np.ndarray:
    """Value at x of an L-Lipschitz extension of the samples.

    Finds a point in the intersection of the balls B(y_i, L |x - x_i|) by
    extrapolated averaged projections, starting from the inverse-distance
    weighted mean of the targets. When the projections stall (balls that
    only touch) the iterate is finished by a minimax polish.
    """
    query = np.asarray(x, dtype=float).reshape(-1)
    if query.shape[0] != samples.source_dim:
        raise DimensionMismatchError(f"query has dimension {query.shape[0]}, expected {samples.source_dim}")
    if lipschitz < 0:
        raise PreconditionError("Lipschitz constant must be non-negative")
    if check:
        constant = lipschitz_constant(samples)
        if constant > lipschitz + tol:
            raise LipschitzViolationError(f"samples have constant {constant:.12g} > {lipschitz:.12g}")

    distances = np.linalg.norm(samples.sources - query, axis=1)
    hit = np.flatnonzero(distances == 0.0)
    if hit.size:
        return samples.targets[hit[0]].copy()

    centers = samples.targets
    radii = lipschitz * distances
    target_radii = radii + 0.5 * tol
    y = _initial_guess(distances, centers)
    residual = _ball_residual(y, centers, radii)
    checkpoint = residual
    iteration = 0
    while residual > tol and iteration < max_iter:
        diff = y - centers
        dist = np.linalg.norm(diff, axis=1)
        excess = np.maximum(dist - target_radii, 0.0)
        active = excess > 0.0
        steps = np.zeros_like(diff)
        steps[active] = -(excess[active] / dist[active])[:, None] * diff[active]
        mean_step = steps.mean(axis=0)
        mean_norm = float(mean_step @ mean_step)
        if mean_norm == 0.0:
            break
        extrapolation = float(np.mean(np.sum(steps * steps, axis=1))) / mean_norm
        y = y + extrapolation * mean_step
        residual = _ball_residual(y, centers, radii)
        iteration += 1
        if iteration % KIRSZBRAUN_STALL_WINDOW == 0:
            if residual > 0.1 * checkpoint:
                break
            checkpoint = residual
    if residual > tol:
        polished = _minimax_polish(centers, target_radii, y)
        polished_residual = _ball_residual(polished, centers, radii)
        LOGGER.debug(
            "kirszbraun-polished",
            extra={"iterations": iteration, "before": residual, "after": polished_residual},
        )
        if polished_residual < residual:
            y, residual = polished, polished_residual
    if residual <= tol:
        if iteration:
            LOGGER.debug("kirszbraun-converged", extra={"iterations": iteration, "residual": residual})
        return y
    LOGGER.warning("kirszbraun-not-converged", extra={"residual": residual, "max_iter": max_iter})
    raise ConvergenceError(
        f"Kirszbraun extension infeasible within {max_iter} iterations (residual {residual:.3g})",
        iterations=iteration,
        residual=residual,
    )


def _envelope_midpoint(samples: GraphSamples, constants: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Per target column, the mean of the McShane upper and Whitney lower envelopes."""
    dist = cdist(pts, samples.sources)[:, :, None]
    upper = np.min(samples.targets[None, :, :] + constants * dist, axis=1)
    lower = np.max(samples.targets[None, :, :] - constants * dist, axis=1)
    out = 0.5 * (upper + lower)
    hit_rows, hit_cols = np.nonzero(dist[:, :, 0] == 0.0)
    out[hit_rows] = samples.targets[hit_cols]
    return out


def column_constants(samples: GraphSamples) -> np.ndarray:
    """Lipschitz constant of each target coordinate on its own."""
    return np.array(
        [lipschitz_constant(GraphSamples(samples.sources, samples.targets[:, [k]])) for k in range(samples.target_dim)]
    )


def certified_extension(samples: GraphSamples, lipschitz: float, xs: Any) -> np.ndarray:
    """Closed-form L-Lipschitz extension for a one-dimensional base or fiber.

    On a line the piecewise-linear interpolant (constant beyond the end
    samples) keeps the data constant. For scalar targets the midpoint of the
    upper and lower Lipschitz envelopes is L-Lipschitz. Both are genuine maps,
    so values at different queries stay mutually consistent.
    """
    pts = np.atleast_2d(np.asarray(xs, dtype=float))
    if pts.shape[1] != samples.source_dim:
        raise DimensionMismatchError(f"queries have dimension {pts.shape[1]}, expected {samples.source_dim}")
    if samples.source_dim == 1:
        order = np.argsort(samples.sources[:, 0])
        knots = samples.sources[order, 0]
        values = samples.targets[order]
        out = np.column_stack([np.interp(pts[:, 0], knots, values[:, k]) for k in range(samples.target_dim)])
    elif samples.target_dim == 1:
        out = _envelope_midpoint(samples, np.array([lipschitz], dtype=float), pts)
    else:
        raise PreconditionError("closed-form extension needs a one-dimensional base or fiber")
    return out


@dataclass(frozen=True, eq=False)
class LipMap:
    """Map R^q -> R^p with a certified Lipschitz constant.

    kind is "affine" (x -> A x + b) or "interpolant" (Kirszbraun extension of
    samples with constant L = certified_constant). Interpolants with a
    one-dimensional base or fiber use the closed-form extension and are
    globally L-Lipschitz; higher-dimensional ones are solved per query.
    kind "envelope" extends each target coordinate by its envelope midpoint;
    its constant is the norm of the column constants.
    """

    kind: str
    certified_constant: float
    matrix: Optional[np.ndarray] = None
    offset: Optional[np.ndarray] = None
    samples: Optional[GraphSamples] = None
    column_constants: Optional[np.ndarray] = None
    tol: float = KIRSZBRAUN_TOL
    max_iter: int = KIRSZBRAUN_MAX_ITER
    _dims: Tuple[int, int] = field(default=(0, 0), repr=False)

    def __post_init__(self) -> None:
        if self.kind == "affine":
            if self.matrix is None or self.offset is None:
                raise PreconditionError("affine map needs matrix and offset")
            A = np.atleast_2d(np.asarray(self.matrix, dtype=float))
            b = np.asarray(self.offset, dtype=float).reshape(-1)
            if b.shape[0] != A.shape[0]:
                raise DimensionMismatchError("offset length must equal the matrix row count")
            object.__setattr__(self, "matrix", _frozen(A))
            object.__setattr__(self, "offset", _frozen(b))
            object.__setattr__(self, "_dims", (A.shape[1], A.shape[0]))
        elif self.kind == "interpolant":
            if self.samples is None:
                raise PreconditionError("interpolant map needs samples")
            object.__setattr__(self, "_dims", (self.samples.source_dim, self.samples.target_dim))
        elif self.kind == "envelope":
            if self.samples is None or self.column_constants is None:
                raise PreconditionError("envelope map needs samples and column constants")
            constants = np.asarray(self.column_constants, dtype=float).reshape(-1)
            if constants.shape[0] != self.samples.target_dim:
                raise DimensionMismatchError("one column constant per target coordinate")
            object.__setattr__(self, "column_constants", _frozen(constants))
            object.__setattr__(self, "_dims", (self.samples.source_dim, self.samples.target_dim))
        else:
            raise PreconditionError(f"unknown map kind {self.kind!r}")

    @property
    def source_dim(self) -> int:
        return self._dims[0]

    @property
    def target_dim(self) -> int:
        return self._dims[1]

    @property
    def globally_certified(self) -> bool:
        return self.kind in ("affine", "envelope") or min(self._dims) == 1

    def __call__(self, x: Any) -> np.ndarray:
        point = np.asarray(x, dtype=float).reshape(-1)
        if point.shape[0] != self.source_dim:
            raise DimensionMismatchError(f"map expects inputs of dimension {self.source_dim}")
        if self.kind == "affine":
            return self.matrix @ point + self.offset
        if self.kind == "envelope":
            return _envelope_midpoint(self.samples, self.column_constants, point[None, :])[0]
        if self.globally_certified:
            return certified_extension(self.samples, self.certified_constant, point)[0]
        return kirszbraun_extend(
            self.samples, self.certified_constant, point, tol=self.tol, max_iter=self.max_iter, check=False
        )

    def evaluate_many(self, xs: Any) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.kind == "affine":
            if pts.shape[1] != self.source_dim:
                raise DimensionMismatchError(f"map expects inputs of dimension {self.source_dim}")
            return pts @ self.matrix.T + self.offset
        if self.kind == "envelope":
            if pts.shape[1] != self.source_dim:
                raise DimensionMismatchError(f"map expects inputs of dimension {self.source_dim}")
            return _envelope_midpoint(self.samples, self.column_constants, pts)
        if self.globally_certified and len(pts):
            return certified_extension(self.samples, self.certified_constant, pts)
        return np.vstack([self(pt) for pt in pts]) if len(pts) else np.zeros((0, self.target_dim))

    def translated(self, shift: Any) -> "LipMap":
        delta = np.asarray(shift, dtype=float).reshape(-1)
        if delta.shape[0] != self.target_dim:
            raise DimensionMismatchError("translation must live in the target space")
        if self.kind == "affine":
            return affine_map(self.matrix, self.offset + delta)
        moved = GraphSamples(self.samples.sources, self.samples.targets + delta)
        if self.kind == "envelope":
            return envelope_map(moved)
        return LipMap("interpolant", self.certified_constant, samples=moved, tol=self.tol, max_iter=self.max_iter)

    def to_dict(self) -> dict:
        if self.kind == "affine":
            return {"affine": {"matrix": self.matrix.tolist(), "offset": self.offset.tolist()}}
        if self.kind == "envelope":
            return {"samples": self.samples.to_dict(), "envelope": self.column_constants.tolist()}
        return {"samples": self.samples.to_dict(), "lipschitz": self.certified_constant}


def affine_map(matrix: Any, offset: Any) -> LipMap:
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    constant = float(np.linalg.norm(A, 2))
    return LipMap("affine", constant, matrix=A, offset=np.asarray(offset, dtype=float))


def envelope_map(samples: GraphSamples) -> LipMap:
    constants = column_constants(samples)
    return LipMap("envelope", float(np.linalg.norm(constants)), samples=samples, column_constants=constants)


def interpolant_map(
    samples: GraphSamples, lipschitz: float, tol: float = KIRSZBRAUN_TOL, max_iter: int = KIRSZBRAUN_MAX_ITER
) -> LipMap:
    constant = lipschitz_constant(samples)
    if constant > lipschitz + tol:
        raise LipschitzViolationError(f"samples have constant {constant:.12g} > {lipschitz:.12g}")
    return LipMap("interpolant", float(lipschitz), samples=samples, tol=tol, max_iter=max_iter)


def build_inextendible(samples: GraphSamples, mode: Union[GraphMode, str], tol: float = KIRSZBRAUN_TOL) -> LipMap:
    """Graph section defined on all of R^q through the sample witnesses."""
    mode = GraphMode(mode)
    constant = lipschitz_constant(samples)
    if mode is GraphMode.CAUSAL:
        if constant > 1.0 + tol:
            raise LipschitzViolationError(f"causal graph needs constant <= 1, data has {constant:.12g}")
        lipschitz = 1.0
    else:
        # A strict extension is only certified with a margin below 1.
        if constant >= 1.0 - tol:
            raise LipschitzViolationError(
                f"timelike graph needs constant < 1 - tol, data has {constant:.12g}"
            )
        lipschitz = constant
    LOGGER.info("graph-built", extra={"mode": mode.value, "constant": lipschitz, "samples": samples.count})
    return LipMap("interpolant", lipschitz, samples=samples, tol=tol)


# -- convex domains ----------------------------------------------------


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple


@dataclass(frozen=True)
class Annulus:
    center: tuple
    inner: float
    outer: float


@dataclass(frozen=True)
class Hull:
    points: tuple


Domain = Union[Ball, Box, Annulus, Hull]


def same_causality_as_ambient(domain: Domain) -> bool:
    """A flat domain U x R^p has the causality of R^{p,q} iff U is convex."""
    if isinstance(domain, Ball):
        if not domain.radius > 0:
            raise PreconditionError("ball radius must be positive")
        return True
    if isinstance(domain, Box):
        lo, hi = np.asarray(domain.lo, dtype=float), np.asarray(domain.hi, dtype=float)
        if lo.shape != hi.shape or not np.all(lo < hi):
            raise PreconditionError("box needs lo < hi componentwise")
        return True
    if isinstance(domain, Annulus):
        if not 0 < domain.inner < domain.outer:
            raise PreconditionError("annulus needs 0 < r_in < r_out")
        return False
    if isinstance(domain, Hull):
        if len(domain.points) == 0:
            raise PreconditionError("hull needs at least one point")
        return True
    raise PreconditionError(f"unsupported domain {type(domain).__name__}")


# -- a.e. differentiability ---------------------------------------------


@dataclass
class DifferentiabilityReport:
    points: int
    differentiable: int
    max_jacobian_norm: float
    certified_constant: float

    @property
    def fraction(self) -> float:
        return self.differentiable / self.points if self.points else 1.0

    @property
    def within_constant(self) -> bool:
        return self.max_jacobian_norm <= self.certified_constant + 1e-6


def _central_jacobian(fmap: LipMap, x: np.ndarray, step: float) -> np.ndarray:
    cols = []
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = step
        cols.append((fmap(x + e) - fmap(x - e)) / (2.0 * step))
    return np.column_stack(cols)


def differentiability_probe(
    fmap: LipMap, points: Any, steps: Sequence[float] = (1e-2, 1e-3, 1e-4), tol: float = 1e-6
) -> DifferentiabilityReport:
    """Check that difference quotients settle at sampled points (Rademacher)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(steps) < 2:
        raise PreconditionError("need at least two finite-difference steps")
    good = 0
    max_norm = 0.0
    for x in pts:
        jacobians = [_central_jacobian(fmap, x, h) for h in steps]
        last, previous = jacobians[-1], jacobians[-2]
        scale = max(1.0, float(np.linalg.norm(last)))
        if np.linalg.norm(last - previous) <= tol * scale:
            good += 1
        max_norm = max(max_norm, float(np.linalg.norm(last, 2)))
    return DifferentiabilityReport(len(pts), good, max_norm, fmap.certified_constant)


__all__ = [
    "GraphSamples",
    "GraphMode",
    "LipMap",
    "lipschitz_constant",
    "lift_samples",
    "samples_from_points",
    "is_causal_position",
    "kirszbraun_extend",
    "certified_extension",
    "column_constants",
    "affine_map",
    "envelope_map",
    "interpolant_map",
    "build_inextendible",
    "Ball",
    "Box",
    "Annulus",
    "Hull",
    "same_causality_as_ambient",
    "DifferentiabilityReport",
    "differentiability_probe",
]
