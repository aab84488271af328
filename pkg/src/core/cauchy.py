"""Cauchy surfaces of flat space as graphs of contracting maps R^p -> R^q.

Why this design:
- A spacelike graph and a causal graph meet where x = w(f(x)); solve it by Picard iteration.
- The composition is certified contracting, so the a-posteriori Banach bound is the stopping rule.
- Verification reports collect failures instead of raising so batch runs always finish.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, List, Optional

import numpy as np

from .errors import ConvergenceError, DimensionMismatchError, LipschitzViolationError, PreconditionError
from .lipgraph import (
    GraphSamples,
    LipMap,
    affine_map,
    column_constants,
    envelope_map,
    interpolant_map,
    lipschitz_constant,
)
from .pqform import PseudoMetric

# Contract, iterate, converge.

LOGGER = logging.getLogger("pqcausal.cauchy")

FIXED_POINT_TOL = 1e-10
FIXED_POINT_MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class SpacelikeMap:
    """Graph {(x, w(x))} of a map R^p -> R^q with certified constant k < 1."""

    graph_map: LipMap
    tol: float = 1e-9

    def __post_init__(self) -> None:
        k = self.graph_map.certified_constant
        if k >= 1.0 - self.tol:
            raise LipschitzViolationError(f"spacelike surface needs constant < 1, got {k:.12g}")

    @classmethod
    def from_lipmap(cls, graph_map: LipMap, tol: float = 1e-9) -> "SpacelikeMap":
        return cls(graph_map, tol)

    @property
    def certified_constant(self) -> float:
        return self.graph_map.certified_constant

    @property
    def p(self) -> int:
        return self.graph_map.source_dim

    @property
    def q(self) -> int:
        return self.graph_map.target_dim

    def __call__(self, x: Any) -> np.ndarray:
        return self.graph_map(x)

    def graph_points(self, xs: Any) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(xs, dtype=float))
        return np.hstack([pts, self.graph_map.evaluate_many(pts)])

    def is_spacelike_on(self, xs: Any, metric: Optional[PseudoMetric] = None) -> bool:
        """Every chord between the lifted points is spacelike."""
        g = metric or PseudoMetric.standard(self.p, self.q)
        pts = self.graph_points(xs)
        i, j = np.triu_indices(len(pts), k=1)
        return bool(np.all(g.evaluate(pts[j] - pts[i]) > 0.0))


def build_spacelike(samples: GraphSamples, tol: float = 1e-9) -> SpacelikeMap:
    """Spacelike graph through the samples; uses the coordinatewise envelope when p, q > 1 allow it."""
    k = lipschitz_constant(samples)
    if k >= 1.0 - tol:
        raise LipschitzViolationError(f"spacelike data needs constant < 1, got {k:.12g}")
    if min(samples.source_dim, samples.target_dim) > 1:
        envelope = envelope_map(samples)
        if envelope.certified_constant < 1.0 - tol:
            return SpacelikeMap(envelope, tol)
    return SpacelikeMap(interpolant_map(samples, k, tol=tol), tol)


@dataclass
class FixedPointResult:
    x: np.ndarray
    point: np.ndarray
    iterations: int
    contraction: float
    steps: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "point": self.point.tolist(),
            "iterations": self.iterations,
            "contraction": self.contraction,
        }


def intersect_fixed_point(
    f: LipMap,
    w: SpacelikeMap,
    x0: Any = None,
    tol: float = FIXED_POINT_TOL,
    max_iter: int = FIXED_POINT_MAX_ITER,
) -> FixedPointResult:
    """Unique intersection of graph(f) (causal, R^q -> R^p) with graph(w) (spacelike)."""
    if f.certified_constant > 1.0 + 1e-12:
        raise LipschitzViolationError(f"causal map needs constant <= 1, got {f.certified_constant:.12g}")
    if f.source_dim != w.q or f.target_dim != w.p:
        raise DimensionMismatchError(
            f"causal map R^{f.source_dim}->R^{f.target_dim} does not pair with surface R^{w.p}->R^{w.q}"
        )
    k = w.certified_constant * min(f.certified_constant, 1.0)
    x = np.zeros(w.q) if x0 is None else np.asarray(x0, dtype=float).reshape(-1)
    if x.shape[0] != w.q:
        raise DimensionMismatchError(f"initial point must lie in R^{w.q}")
    threshold = tol * (1.0 - k) / k if k > 0 else np.inf
    steps: List[float] = []
    for iteration in range(1, max_iter + 1):
        x_next = w(f(x))
        step = float(np.linalg.norm(x_next - x))
        steps.append(step)
        x = x_next
        if step <= threshold or step == 0.0:
            LOGGER.debug("fixed-point-converged", extra={"iterations": iteration, "step": step})
            return FixedPointResult(x, np.concatenate([f(x), x]), iteration, k, steps)
    LOGGER.warning("fixed-point-not-converged", extra={"max_iter": max_iter, "contraction": k})
    raise ConvergenceError(
        f"fixed point not reached in {max_iter} iterations (contraction {k:.6g})",
        iterations=max_iter,
        residual=steps[-1] if steps else None,
    )


@dataclass
class CauchyReport:
    trials: int
    unique: int = 0
    max_discrepancy: float = 0.0
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and self.unique == self.trials

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "unique": self.unique,
            "max_discrepancy": self.max_discrepancy,
            "failures": list(self.failures),
            "ok": self.ok,
        }


def random_causal_map(rng: np.random.Generator, q: int, p: int, affine: bool, tol: float = 1e-12) -> LipMap:
    """Random 1-Lipschitz map R^q -> R^p, affine or sample based.

    Sample-based maps are interpolants when q or p is 1 and coordinatewise
    envelopes otherwise, so every one of them is a globally 1-Lipschitz map.
    """
    if affine:
        A = rng.standard_normal((p, q))
        norm = float(np.linalg.norm(A, 2))
        A = A / norm * rng.uniform(0.2, 1.0) if norm > 0 else A
        return affine_map(A, rng.standard_normal(p))
    count = int(rng.integers(2, 9))
    sources = rng.uniform(-2.0, 2.0, size=(count, q))
    targets = rng.standard_normal((count, p))
    if min(q, p) == 1:
        constant = lipschitz_constant(GraphSamples(sources, targets))
        if constant > 1.0:
            targets = targets / constant
        return interpolant_map(GraphSamples(sources, targets), 1.0, tol=tol)
    constant = float(np.linalg.norm(column_constants(GraphSamples(sources, targets))))
    if constant > 1.0:
        targets = targets / constant
    return envelope_map(GraphSamples(sources, targets))


def verify_cauchy_surface(
    w: SpacelikeMap, trial_count: int, rng_seed: Optional[int] = 0, tol: float = FIXED_POINT_TOL
) -> CauchyReport:
    """Every random causal graph meets graph(w) exactly once."""
    if trial_count <= 0:
        raise PreconditionError("trial_count must be positive")
    rng = np.random.default_rng(rng_seed)
    report = CauchyReport(trials=trial_count)
    for trial in range(trial_count):
        f = random_causal_map(rng, w.q, w.p, affine=trial % 2 == 0)
        starts = [np.zeros(w.q), rng.uniform(-5.0, 5.0, size=w.q)]
        try:
            results = [intersect_fixed_point(f, w, x0=s, tol=tol) for s in starts]
        except ConvergenceError as exc:
            report.failures.append(f"trial {trial}: {exc}")
            continue
        gap = float(np.linalg.norm(results[0].x - results[1].x))
        report.max_discrepancy = max(report.max_discrepancy, gap)
        if gap <= 10.0 * tol:
            report.unique += 1
        else:
            report.failures.append(f"trial {trial}: starts disagree by {gap:.3g}")
    LOGGER.info("cauchy-verified", extra={"trials": trial_count, "unique": report.unique})
    return report


__all__ = [
    "SpacelikeMap",
    "build_spacelike",
    "FixedPointResult",
    "intersect_fixed_point",
    "CauchyReport",
    "random_causal_map",
    "verify_cauchy_surface",
]
