"""Versioned JSON instance files: schemas, loading, atomic saving and builders.

Why this design:
- Validate every input with pydantic before any numeric code sees it.
- Accept bare payloads when the caller already knows what kind of file it expects.
- Write through a temp file and sorted keys so saved files are atomic and byte-stable.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator
from typing_extensions import Annotated

from ..core.cauchy import SpacelikeMap
from ..core.errors import InstanceFormatError
from ..core.lipgraph import GraphSamples, LipMap, affine_map, interpolant_map, lipschitz_constant
from ..core.plateau import GridBase, PlateauProblem
from ..core.pqform import PseudoMetric
from ..core.split import FoliationWitness, LevelSetSurface
from ..utils.settings import PlateauSection

LOGGER = logging.getLogger("pqcausal.instances")

FORMAT_VERSION = 1

InstanceKind = Literal["metric", "samples", "problem", "foliation", "surface"]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class InstanceFile(_Model):
    version: Literal[1]
    kind: InstanceKind
    payload: Dict[str, Any]


class MetricPayload(_Model):
    p: Annotated[int, Field(ge=1)]
    q: Annotated[int, Field(ge=1)]
    spatial_weights: Optional[List[PositiveFloat]] = None
    temporal_weights: Optional[List[PositiveFloat]] = None


class AffinePayload(_Model):
    matrix: List[List[float]]
    offset: List[float]


class SamplesPayload(_Model):
    sources: List[List[float]]
    targets: List[List[float]]


class MapPayload(_Model):
    affine: Optional[AffinePayload] = None
    samples: Optional[SamplesPayload] = None
    lipschitz: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _one_representation(self) -> "MapPayload":
        if (self.affine is None) == (self.samples is None):
            raise ValueError("map payload needs exactly one of 'affine' or 'samples'")
        return self


class FoliationPayload(_Model):
    shift: MapPayload


class BoxBasePayload(_Model):
    kind: Literal["box"]
    lo: List[float]
    hi: List[float]
    nodes: Annotated[int, Field(ge=3)]


class BallBasePayload(_Model):
    kind: Literal["ball"]
    center: List[float]
    radius: PositiveFloat
    nodes: Annotated[int, Field(ge=5)]


class ProblemPayload(_Model):
    base: Annotated[Union[BoxBasePayload, BallBasePayload], Field(discriminator="kind")]
    metric: Optional[MetricPayload] = None
    boundary: MapPayload
    solver: Dict[str, Any] = Field(default_factory=dict)


PAYLOAD_MODELS = {
    "metric": MetricPayload,
    "samples": MapPayload,
    "surface": MapPayload,
    "problem": ProblemPayload,
    "foliation": FoliationPayload,
}


def _read_json(path: Union[str, Path]) -> Any:
    target = Path(path)
    try:
        return json.loads(target.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise InstanceFormatError(f"instance file not found: {target}") from exc
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InstanceFormatError(f"cannot read {target}: {exc}") from exc


def parse_instance(data: Any, expected_kind: str) -> BaseModel:
    if expected_kind not in PAYLOAD_MODELS:
        raise InstanceFormatError(f"unknown instance kind {expected_kind!r}")
    try:
        if isinstance(data, dict) and "version" in data:
            envelope = InstanceFile.model_validate(data)
            if envelope.kind != expected_kind:
                raise InstanceFormatError(f"expected a {expected_kind!r} file, got {envelope.kind!r}")
            data = envelope.payload
        return PAYLOAD_MODELS[expected_kind].model_validate(data)
    except ValidationError as exc:
        raise InstanceFormatError(f"invalid {expected_kind} instance: {exc}") from exc


def load_instance(path: Union[str, Path], expected_kind: str) -> BaseModel:
    model = parse_instance(_read_json(path), expected_kind)
    LOGGER.debug("instance-loaded", extra={"path": str(path), "kind": expected_kind})
    return model


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_atomic(path: Union[str, Path], content: Union[str, bytes]) -> Path:
    target = Path(path)
    temp_path = target.with_name(target.name + ".tmp")
    if isinstance(content, bytes):
        temp_path.write_bytes(content)
    else:
        temp_path.write_text(content, encoding="utf-8")
    temp_path.replace(target)
    return target


def save_instance(path: Union[str, Path], kind: str, payload: Dict[str, Any]) -> Path:
    parse_instance(payload, kind)
    envelope = {"version": FORMAT_VERSION, "kind": kind, "payload": payload}
    return write_atomic(path, dump_json(envelope))


# -- builders ----------------------------------------------------------------


def build_metric(payload: MetricPayload) -> PseudoMetric:
    spatial = payload.spatial_weights or [1.0] * payload.p
    temporal = payload.temporal_weights or [1.0] * payload.q
    return PseudoMetric(payload.p, payload.q, tuple(spatial), tuple(temporal))


def build_samples(payload: MapPayload) -> GraphSamples:
    if payload.samples is None:
        raise InstanceFormatError("expected a 'samples' map payload")
    return GraphSamples(np.asarray(payload.samples.sources, dtype=float), np.asarray(payload.samples.targets, dtype=float))


def build_map(payload: MapPayload, tol: float = 1e-9) -> LipMap:
    if payload.affine is not None:
        return affine_map(payload.affine.matrix, payload.affine.offset)
    samples = build_samples(payload)
    lipschitz = payload.lipschitz if payload.lipschitz is not None else lipschitz_constant(samples)
    return interpolant_map(samples, max(lipschitz, 1e-300), tol=tol)


def build_surface(payload: MapPayload, tol: float = 1e-9) -> LevelSetSurface:
    return LevelSetSurface(SpacelikeMap(build_map(payload, tol), tol))


def build_foliation(payload: FoliationPayload, tol: float = 1e-9) -> FoliationWitness:
    return FoliationWitness(build_map(payload.shift, tol), tol)


def build_base(payload: Union[BoxBasePayload, BallBasePayload]) -> GridBase:
    if isinstance(payload, BoxBasePayload):
        return GridBase.box(payload.lo, payload.hi, payload.nodes)
    return GridBase.ball(payload.center, payload.radius, payload.nodes)


def build_problem(payload: ProblemPayload, defaults: Optional[PlateauSection] = None) -> PlateauProblem:
    base = build_base(payload.base)
    boundary = build_map(payload.boundary)
    if payload.metric is not None:
        metric = build_metric(payload.metric)
    else:
        metric = PseudoMetric.standard(boundary.target_dim, base.q)
    try:
        settings = (defaults or PlateauSection()).to_solver(payload.solver)
    except ValidationError as exc:
        raise InstanceFormatError(f"invalid solver block: {exc}") from exc
    return PlateauProblem.from_map(base, metric, boundary, settings)


__all__ = [
    "FORMAT_VERSION",
    "InstanceFile",
    "MetricPayload",
    "MapPayload",
    "FoliationPayload",
    "ProblemPayload",
    "parse_instance",
    "load_instance",
    "save_instance",
    "dump_json",
    "write_atomic",
    "build_metric",
    "build_samples",
    "build_map",
    "build_surface",
    "build_foliation",
    "build_base",
    "build_problem",
]
