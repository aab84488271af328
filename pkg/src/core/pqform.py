"""Signature-(p,q) quadratic forms with diagonal weights.

Why this design:
- Keep every metric a frozen value so classification stays pure and thread-safe.
- Restrict to diagonal weights in a fixed split basis so cone comparison is closed-form.
- Make tolerances explicit arguments instead of hidden epsilons inside comparisons.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy import linalg

from .errors import DimensionMismatchError, PreconditionError, SignatureMismatchError

# Cones first, coordinates later.

LOGGER = logging.getLogger("pqcausal.pqform")

DEFAULT_TOL = 1e-12


class CausalClass(str, Enum):
    SPACELIKE = "Spacelike"
    LIGHTLIKE = "Lightlike"
    TIMELIKE = "Timelike"

    @property
    def is_causal(self) -> bool:
        return self is not CausalClass.SPACELIKE


class SubspaceClass(str, Enum):
    SPACELIKE = "Spacelike"
    LIGHTLIKE = "Lightlike"
    CAUSAL = "Causal"
    TIMELIKE = "Timelike"
    MIXED = "Mixed"

    @property
    def is_causal(self) -> bool:
        return self in (SubspaceClass.LIGHTLIKE, SubspaceClass.CAUSAL, SubspaceClass.TIMELIKE)


@dataclass(frozen=True)
class PseudoMetric:
    """Q(v) = sum a_i v+_i^2 - sum b_j v-_j^2 on R^{p+q}, spatial block first."""

    p: int
    q: int
    spatial_weights: tuple
    temporal_weights: tuple

    def __post_init__(self) -> None:
        if int(self.p) < 1 or int(self.q) < 1:
            raise PreconditionError(f"signature must have p, q >= 1, got ({self.p}, {self.q})")
        a = tuple(float(w) for w in self.spatial_weights)
        b = tuple(float(w) for w in self.temporal_weights)
        if len(a) != self.p or len(b) != self.q:
            raise PreconditionError(
                f"expected {self.p} spatial and {self.q} temporal weights, got {len(a)} and {len(b)}"
            )
        if not all(np.isfinite(w) and w > 0 for w in a + b):
            raise PreconditionError("all metric weights must be finite and strictly positive")
        object.__setattr__(self, "spatial_weights", a)
        object.__setattr__(self, "temporal_weights", b)

    # -- constructors -------------------------------------------------
    @classmethod
    def diagonal(cls, spatial: Sequence[float], temporal: Sequence[float]) -> "PseudoMetric":
        return cls(len(spatial), len(temporal), tuple(spatial), tuple(temporal))

    @classmethod
    def standard(cls, p: int, q: int) -> "PseudoMetric":
        return cls(p, q, (1.0,) * p, (1.0,) * q)

    @classmethod
    def sandwich_lower(cls, p: int, q: int) -> "PseudoMetric":
        """g_-: temporal weights 2, a wider cone than the standard metric."""
        return cls(p, q, (1.0,) * p, (2.0,) * q)

    @classmethod
    def sandwich_upper(cls, p: int, q: int) -> "PseudoMetric":
        """g_+: temporal weights 1/2, a narrower cone than the standard metric."""
        return cls(p, q, (1.0,) * p, (0.5,) * q)

    @classmethod
    def epsilon_metric(cls, p: int, q: int, eps: float) -> "PseudoMetric":
        if not 0.0 < eps < 1.0:
            raise PreconditionError("eps must lie in (0, 1)")
        return cls(p, q, (1.0,) * p, (1.0 - eps,) * q)

    # -- evaluation ---------------------------------------------------
    @property
    def dim(self) -> int:
        return self.p + self.q

    @property
    def diag(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.spatial_weights), -np.asarray(self.temporal_weights)])

    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)

    def _check(self, v: Any) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.shape[-1:] != (self.dim,):
            raise DimensionMismatchError(f"expected vectors of length {self.dim}, got shape {arr.shape}")
        return arr

    def split(self, v: Any) -> tuple:
        arr = self._check(v)
        return arr[..., : self.p], arr[..., self.p :]

    def evaluate(self, v: Any) -> Any:
        arr = self._check(v)
        return np.sum(self.diag * arr * arr, axis=-1)

    def bilinear(self, u: Any, v: Any) -> Any:
        return np.sum(self.diag * self._check(u) * self._check(v), axis=-1)

    def gram(self, basis: Any) -> np.ndarray:
        vecs = self._check(np.atleast_2d(basis))
        return (vecs * self.diag) @ vecs.T

    # -- serialization ------------------------------------------------
    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "q": self.q,
            "spatial_weights": list(self.spatial_weights),
            "temporal_weights": list(self.temporal_weights),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PseudoMetric":
        return cls(
            int(data["p"]),
            int(data["q"]),
            tuple(data["spatial_weights"]),
            tuple(data["temporal_weights"]),
        )


def classify_vector(g: PseudoMetric, v: Any, tol: float = DEFAULT_TOL) -> CausalClass:
    arr = g._check(v)
    if arr.ndim != 1:
        raise DimensionMismatchError("classify_vector expects a single vector")
    value = float(g.evaluate(arr))
    band = tol * float(arr @ arr)
    if value < -band:
        return CausalClass.TIMELIKE
    if value > band:
        return CausalClass.SPACELIKE
    return CausalClass.LIGHTLIKE


def classify_segment(g: PseudoMetric, x: Any, y: Any, tol: float = DEFAULT_TOL) -> CausalClass:
    """Class of the straight segment [x, y]; a degenerate segment is Lightlike."""
    xa, ya = g._check(x), g._check(y)
    return classify_vector(g, ya - xa, tol)


def classify_subspace(g: PseudoMetric, basis: Any, tol: float = DEFAULT_TOL) -> SubspaceClass:
    vecs = g._check(np.atleast_2d(np.asarray(basis, dtype=float)))
    k = vecs.shape[0]
    if k == 0 or k > g.dim:
        raise DimensionMismatchError(f"basis must contain between 1 and {g.dim} vectors")
    singular = linalg.svdvals(vecs)
    if singular[-1] <= max(tol, DEFAULT_TOL) * max(1.0, singular[0]) * 10.0:
        raise PreconditionError("basis vectors are linearly dependent")
    eig = linalg.eigh(g.gram(vecs), eigvals_only=True)
    if np.all(eig < -tol):
        return SubspaceClass.TIMELIKE
    if np.all(np.abs(eig) <= tol):
        return SubspaceClass.LIGHTLIKE
    if np.all(eig <= tol):
        return SubspaceClass.CAUSAL
    if np.all(eig > tol):
        return SubspaceClass.SPACELIKE
    return SubspaceClass.MIXED


def _require_same_signature(g1: PseudoMetric, g2: PseudoMetric) -> None:
    if (g1.p, g1.q) != (g2.p, g2.q):
        raise SignatureMismatchError(f"signatures differ: ({g1.p},{g1.q}) vs ({g2.p},{g2.q})")


def metric_leq(g1: PseudoMetric, g2: PseudoMetric, tol: float = DEFAULT_TOL) -> bool:
    """True iff every causal vector of g2 is causal for g1, i.e. cone(g2) is inside cone(g1)."""
    _require_same_signature(g1, g2)
    a1, a2 = np.asarray(g1.spatial_weights), np.asarray(g2.spatial_weights)
    b1, b2 = np.asarray(g1.temporal_weights), np.asarray(g2.temporal_weights)
    widest_spatial = float(np.max(a1 / a2))
    narrowest_temporal = float(np.min(b1 / b2))
    return widest_spatial <= narrowest_temporal * (1.0 + tol)


def comparison_certifies(g: PseudoMetric, reference: PseudoMetric, tol: float = DEFAULT_TOL) -> bool:
    """Whether the temporal projection is certified as a Cauchy time function of g.

    The projection is a Cauchy time function for every flat diagonal metric; it
    transfers to g whenever every causal vector of g is causal for the reference.
    """
    certified = metric_leq(reference, g, tol)
    LOGGER.debug("comparison-check", extra={"certified": certified})
    return certified


def cone_sample(g: PseudoMetric, count: int, rng_seed: Optional[int] = 0) -> np.ndarray:
    """Unit vectors drawn from the closed causal cone of g (Q(v) <= 0)."""
    if count < 0:
        raise PreconditionError("count must be non-negative")
    if count == 0:
        return np.zeros((0, g.dim))
    rng = np.random.default_rng(rng_seed)
    temporal = rng.standard_normal((count, g.q))
    temporal /= np.linalg.norm(temporal, axis=1, keepdims=True)
    spatial = rng.standard_normal((count, g.p))
    spatial /= np.linalg.norm(spatial, axis=1, keepdims=True)
    radius = rng.random((count, 1)) ** (1.0 / g.p) * (1.0 - 1e-9)
    vecs = np.hstack(
        [
            radius * spatial / np.sqrt(np.asarray(g.spatial_weights)),
            temporal / np.sqrt(np.asarray(g.temporal_weights)),
        ]
    )
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


__all__ = [
    "CausalClass",
    "SubspaceClass",
    "PseudoMetric",
    "classify_vector",
    "classify_segment",
    "classify_subspace",
    "metric_leq",
    "comparison_certifies",
    "cone_sample",
]
