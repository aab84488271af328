"""Flat causal diamonds, the future of a timelike hyperplane, and their conformal models.

Why this design:
- Keep the closed-form membership test next to the brute-force segment oracle that validates it.
- Fix explicit coordinates for the inversion (basepoint e1, future side positive).
- Verify conformality numerically with central differences instead of trusting formulas.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Tuple

import numpy as np

from .errors import DimensionMismatchError, PreconditionError, SingularPointError
from .pqform import CausalClass, PseudoMetric, classify_segment

LOGGER = logging.getLogger("pqcausal.diamond")

BOUNDARY_BAND = 1e-6
ORACLE_REFINE_STEPS = 60


def _point(pt: Any, p: int, q: int) -> np.ndarray:
    arr = np.asarray(pt, dtype=float)
    if arr.shape[-1:] != (p + q,):
        raise DimensionMismatchError(f"expected points of length {p + q}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class FlatDiamond:
    """Joint of the temporal unit sphere S- and the spatial unit sphere S+."""

    p: int
    q: int
    center: Optional[tuple] = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.p < 1 or self.q < 1:
            raise PreconditionError("diamond needs p, q >= 1")
        if not self.scale > 0:
            raise PreconditionError("diamond scale must be positive")
        if self.center is not None and len(self.center) != self.p + self.q:
            raise DimensionMismatchError("diamond center has the wrong dimension")

    def to_canonical(self, pt: Any) -> np.ndarray:
        arr = _point(pt, self.p, self.q)
        if self.center is not None:
            arr = arr - np.asarray(self.center, dtype=float)
        return arr / self.scale

    def contains(self, pt: Any, tol: float = 0.0) -> bool:
        return bool(in_flat_diamond(self.to_canonical(pt), self.p, tol))


@dataclass(frozen=True)
class ProductModelPoint:
    """(x, y, t): x on the hyperboloid in R^{p,0} + R e1, y in L, t > 0."""

    x: tuple
    y: tuple
    t: float

    def __post_init__(self) -> None:
        if not self.t > 0:
            raise PreconditionError("half-space height t must be positive")
        x = np.asarray(self.x, dtype=float)
        spatial, apex = x[:-1], x[-1]
        if apex < 1.0 - 1e-12 or abs(float(spatial @ spatial) - apex * apex + 1.0) > 1e-9 * max(1.0, apex * apex):
            raise PreconditionError("x must lie on the upper sheet of the hyperboloid Q = -1")
        object.__setattr__(self, "x", tuple(float(c) for c in x))
        object.__setattr__(self, "y", tuple(float(c) for c in self.y))

    @classmethod
    def from_chart(cls, u: Any, y: Any, t: float) -> "ProductModelPoint":
        """Hyperboloid chart: spatial coordinates u, apex coordinate sqrt(1 + |u|^2)."""
        u = np.asarray(u, dtype=float).reshape(-1)
        return cls(tuple(np.append(u, np.sqrt(1.0 + u @ u))), tuple(np.asarray(y, dtype=float).reshape(-1)), t)


def in_flat_diamond(pt: Any, p: int, tol: float = 0.0) -> Any:
    arr = np.asarray(pt, dtype=float)
    spatial = np.linalg.norm(arr[..., :p], axis=-1)
    temporal = np.linalg.norm(arr[..., p:], axis=-1)
    return spatial + temporal < 1.0 - tol


def sample_temporal_sphere(q: int, count: int, rng_seed: Optional[int] = 0) -> np.ndarray:
    """Points of the unit sphere of R^{0,q}; the 2q axis points come first."""
    if count < 2 * q:
        raise PreconditionError(f"need at least {2 * q} sphere samples")
    axes = np.vstack([np.eye(q), -np.eye(q)])
    if q == 1:
        return axes
    rng = np.random.default_rng(rng_seed)
    rest = rng.standard_normal((count - 2 * q, q))
    rest /= np.linalg.norm(rest, axis=1, keepdims=True)
    return np.vstack([axes, rest])


def diamond_membership_oracle(
    pt: Any, p: int, q: int, sphere_samples: int = 1000, tol: float = 0.0, rng_seed: Optional[int] = 0
) -> bool:
    """Brute force: the projection lies in the unit disk and pt sees all of S- through timelike segments."""
    arr = _point(pt, p, q).reshape(-1)
    temporal = arr[p:]
    if np.linalg.norm(temporal) >= 1.0:
        return False
    g = PseudoMetric.standard(p, q)
    sphere = sample_temporal_sphere(q, sphere_samples, rng_seed)
    lifted = np.hstack([np.zeros((len(sphere), p)), sphere])
    gaps = g.evaluate(lifted - arr)
    if np.any(gaps >= -tol):
        return False
    # Refine the worst sampled point by bisecting toward pt's projection on S-.
    s = sphere[int(np.argmax(gaps))].copy()
    candidates = [s]
    radius = float(np.linalg.norm(temporal))
    if radius > 0.0:
        direction = temporal / radius
        for _ in range(ORACLE_REFINE_STEPS):
            moved = s + direction
            norm = np.linalg.norm(moved)
            if norm == 0.0:
                break
            s = moved / norm
            candidates.append(s)
    ends = np.hstack([np.zeros((len(candidates), p)), np.asarray(candidates)])
    worst = ends[int(np.argmax(g.evaluate(ends - arr)))]
    return classify_segment(g, arr, worst, tol) is CausalClass.TIMELIKE


def in_future_of_L(pt: Any, p: int, tol: float = 0.0, axis: int = 0) -> Any:
    """Future side of L = span of the temporal axes other than e1."""
    arr = np.asarray(pt, dtype=float)
    spatial = np.linalg.norm(arr[..., :p], axis=-1)
    return spatial < arr[..., p + axis] - tol


def _e1(p: int, q: int) -> np.ndarray:
    e = np.zeros(p + q)
    e[p] = 1.0
    return e


def inversion_phi(pt: Any, p: int, q: int, singular_tol: float = 1e-14) -> np.ndarray:
    """Inversion centred at e1, translated by e1/2 and reflected so S- lands on L."""
    arr = _point(pt, p, q).reshape(-1)
    e1 = _e1(p, q)
    g = PseudoMetric.standard(p, q)
    d = arr - e1
    value = float(g.evaluate(d))
    if abs(value) <= singular_tol * max(1.0, float(d @ d)):
        raise SingularPointError("point lies on the light cone of e1")
    image = -d / value + 0.5 * e1
    image[p] = -image[p]
    return image


def psi_product(m: ProductModelPoint, p: int, q: int) -> np.ndarray:
    x = np.asarray(m.x, dtype=float)
    y = np.asarray(m.y, dtype=float)
    if x.shape[0] != p + 1 or y.shape[0] != q - 1:
        raise DimensionMismatchError(f"model point does not match signature ({p},{q})")
    out = np.zeros(p + q)
    out[:p] = m.t * x[:p]
    out[p] = m.t * x[p]
    out[p + 1 :] = y
    return out


def chart_inverse(pt: Any, p: int, q: int) -> ProductModelPoint:
    arr = _point(pt, p, q).reshape(-1)
    spatial, height, rest = arr[:p], arr[p], arr[p + 1 :]
    t_sq = height * height - float(spatial @ spatial)
    if height <= 0 or t_sq <= 0:
        raise PreconditionError("point is not in the future of L")
    t = float(np.sqrt(t_sq))
    return ProductModelPoint(tuple(np.append(spatial / t, height / t)), tuple(rest), t)


# -- conformality ----------------------------------------------------------


def _jacobian(fn, z: np.ndarray, step: float) -> np.ndarray:
    cols = []
    for k in range(z.shape[0]):
        e = np.zeros_like(z)
        e[k] = step
        cols.append((fn(z + e) - fn(z - e)) / (2.0 * step))
    return np.column_stack(cols)


def product_metric_chart(u: np.ndarray, t: float, q: int) -> np.ndarray:
    """g_H^p (hyperboloid chart) minus g_H^q (half-space chart) in coordinates (u, y, t)."""
    p = u.shape[0]
    hyper = np.eye(p) - np.outer(u, u) / (1.0 + u @ u)
    half = -np.eye(q) / (t * t)
    out = np.zeros((p + q, p + q))
    out[:p, :p] = hyper
    out[p:, p:] = half
    return out


def conformality_check(
    kind: str,
    pt: Any,
    p: int,
    q: int,
    fd_step: float = 1e-5,
    tol: float = 1e-6,
) -> Tuple[float, float]:
    """Best-fit factor lambda with J^T G J = lambda G_source and its relative residual.

    kind "phi": pt is a point of R^{p,q}. kind "psi": pt is a ProductModelPoint,
    differentiated in chart coordinates (u, y, t).

    The factor multiplies the metric itself, not lengths. For psi the pullback
    is t^2 (g_Hp - g_Hq), so the returned factor is t^2; the corresponding
    length scale is t, and the hyperbolic product metric is 1/t^2 times the
    pulled-back flat one.
    """
    G = PseudoMetric.standard(p, q).matrix()
    if kind == "phi":
        base = _point(pt, p, q).reshape(-1).astype(float)
        d = base - _e1(p, q)
        value = float(d[:p] @ d[:p] - d[p:] @ d[p:])
        if abs(value) <= 10.0 * fd_step * max(1.0, float(np.linalg.norm(d))):
            raise SingularPointError("point too close to the light cone of e1")
        J = _jacobian(lambda z: inversion_phi(z, p, q), base, fd_step)
        source = G
    elif kind == "psi":
        if not isinstance(pt, ProductModelPoint):
            raise PreconditionError("psi conformality check needs a ProductModelPoint")
        if pt.t <= 10.0 * fd_step:
            raise SingularPointError("t too close to the boundary of the half-space")
        u0 = np.asarray(pt.x[:p], dtype=float)
        z0 = np.concatenate([u0, np.asarray(pt.y, dtype=float), [pt.t]])

        def chart(z: np.ndarray) -> np.ndarray:
            return psi_product(ProductModelPoint.from_chart(z[:p], z[p : p + q - 1], z[-1]), p, q)

        J = _jacobian(chart, z0, fd_step)
        source = product_metric_chart(u0, pt.t, q)
    else:
        raise PreconditionError(f"unknown map {kind!r}; expected 'phi' or 'psi'")
    pulled = J.T @ G @ J
    factor = float(np.sum(pulled * source) / np.sum(source * source))
    residual = float(np.linalg.norm(pulled - factor * source) / np.linalg.norm(factor * source))
    if residual > tol:
        LOGGER.info("conformality-residual-high", extra={"map": kind, "residual": residual})
    return factor, residual


def membership_grid(
    p: int,
    q: int,
    fixed: Optional[Mapping[str, float]] = None,
    resolution: int = 64,
    extent: float = 1.25,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Membership on the (x1, y1) plane with the other coordinates fixed.

    fixed maps names like "x2" (spatial, 1-based) or "y2" (temporal) to values.
    Returns axis samples xs, ys and a boolean mask indexed [row=y, col=x].
    """
    base = np.zeros(p + q)
    for name, value in (fixed or {}).items():
        axis, index = name[0], int(name[1:]) - 1
        if axis == "x" and 0 < index + 1 <= p and index != 0:
            base[index] = value
        elif axis == "y" and 0 < index + 1 <= q and index != 0:
            base[p + index] = value
        else:
            raise PreconditionError(f"cannot fix coordinate {name!r} in signature ({p},{q})")
    xs = np.linspace(-extent, extent, resolution)
    ys = np.linspace(-extent, extent, resolution)
    X, Y = np.meshgrid(xs, ys)
    pts = np.broadcast_to(base, X.shape + (p + q,)).copy()
    pts[..., 0] = X
    pts[..., p] = Y
    return xs, ys, in_flat_diamond(pts, p)


__all__ = [
    "FlatDiamond",
    "ProductModelPoint",
    "in_flat_diamond",
    "sample_temporal_sphere",
    "diamond_membership_oracle",
    "in_future_of_L",
    "inversion_phi",
    "psi_product",
    "chart_inverse",
    "product_metric_chart",
    "conformality_check",
    "membership_grid",
]
