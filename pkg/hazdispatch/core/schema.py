"""
Document definitions for hazdispatch files
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .env import SiteGeometry
from .exceptions import ValidationError
from .vrpp import (
    FleetConfig,
    RoutingMode,
    VrppInstance,
    VrppSolution,
    build_instance,
)


class Document(BaseModel):
    """Base class for all file documents"""

    model_config = ConfigDict(extra="forbid")

    type: str


class SiteEntry(BaseModel):
    """One candidate site of an instance document"""

    model_config = ConfigDict(extra="forbid")

    id: int = Field(ge=0)
    x: float
    y: float
    value: float = Field(ge=0)
    demand: float = Field(default=0.0, ge=0)
    visit_limit: Optional[int] = Field(default=None, ge=1)


class VehicleEntry(BaseModel):
    """Route budget / capacity of one vehicle (null means unbounded)"""

    model_config = ConfigDict(extra="forbid")

    max_distance: Optional[float] = Field(default=None, gt=0)
    capacity: Optional[float] = Field(default=None, gt=0)


class InstanceDocument(Document):
    """Routing instance for standalone solving"""

    type: Literal["instance"] = "instance"
    mode: RoutingMode
    travel_cost: float = Field(default=1.0, ge=0)
    sites: List[SiteEntry] = Field(default_factory=list)
    vehicles: List[VehicleEntry] = Field(min_length=1)

    @model_validator(mode="after")
    def validate_unique_ids(self) -> InstanceDocument:
        """Site ids identify nodes in solutions, so they must be unique"""
        ids = [s.id for s in self.sites]
        if len(ids) != len(set(ids)):
            raise ValueError("site ids must be unique")
        return self

    def to_instance(self) -> VrppInstance:
        geometry = [
            SiteGeometry(
                id=s.id,
                position=(s.x, s.y),
                depot_distance=math.hypot(s.x, s.y),
            )
            for s in self.sites
        ]
        fleet = FleetConfig(
            max_distances=tuple(
                math.inf if v.max_distance is None else v.max_distance
                for v in self.vehicles
            ),
            capacities=tuple(
                math.inf if v.capacity is None else v.capacity
                for v in self.vehicles
            ),
        )
        limited = any(s.visit_limit is not None for s in self.sites)
        return build_instance(
            [s.value for s in self.sites],
            geometry,
            fleet,
            self.mode,
            travel_cost=self.travel_cost,
            demands=[s.demand for s in self.sites],
            visit_limits=(
                [
                    len(self.vehicles) if s.visit_limit is None
                    else s.visit_limit
                    for s in self.sites
                ]
                if limited
                else None
            ),
        )

    @classmethod
    def from_instance(cls, instance: VrppInstance) -> InstanceDocument:
        sites = []
        for k, site_id in enumerate(instance.site_ids):
            x, y = instance.positions[k + 1]
            sites.append(
                SiteEntry(
                    id=site_id,
                    x=float(x),
                    y=float(y),
                    value=float(instance.values[k]),
                    demand=float(instance.demands[k]),
                    visit_limit=(
                        None
                        if instance.visit_limits is None
                        else int(instance.visit_limits[k])
                    ),
                )
            )
        vehicles = [
            VehicleEntry(
                max_distance=None if math.isinf(d) else d,
                capacity=None if math.isinf(q) else q,
            )
            for d, q in zip(instance.max_distances, instance.capacities)
        ]
        return cls(
            mode=instance.mode,
            travel_cost=instance.travel_cost,
            sites=sites,
            vehicles=vehicles,
        )


class SolutionDocument(Document):
    """Solver output"""

    type: Literal["solution"] = "solution"
    mode: RoutingMode
    solver: Literal["exact", "heuristic"]
    routes: List[List[int]]
    objective: float
    seed: Optional[int] = None
    budget: Optional[int] = None

    def to_solution(self) -> VrppSolution:
        return VrppSolution(
            routes=[list(r) for r in self.routes], objective=self.objective
        )


class SummaryDocument(Document):
    """Metrics of one episode"""

    type: Literal["summary"] = "summary"
    strategy: str
    seed: int
    config: Dict[str, Any]
    metrics: Dict[str, Any]


# Document type registry for deserialization
DOCUMENT_TYPES: Dict[str, Type[Document]] = {
    "instance": InstanceDocument,
    "solution": SolutionDocument,
    "summary": SummaryDocument,
}


def dump_document(
    doc: Document, path: Optional[Union[str, Path]] = None
) -> str:
    """Serialize a document to indented JSON, optionally writing it"""
    text = doc.model_dump_json(indent=2) + "\n"
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text


def parse_document(text: str) -> Document:
    """Deserialize a document, dispatching on its type field"""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"Malformed document: {e}") from e
    if not isinstance(data, dict):
        raise ValidationError(
            "Malformed document: top level must be an object"
        )

    doc_type = data.get("type")
    if doc_type not in DOCUMENT_TYPES:
        raise ValidationError(f"Unknown document type: {doc_type!r}")
    try:
        return DOCUMENT_TYPES[doc_type].model_validate(data)
    except pydantic.ValidationError as e:
        raise ValidationError(f"Invalid {doc_type} document: {e}") from e


def load_document(path: Union[str, Path]) -> Document:
    """Read and deserialize a document file"""
    with open(path, "r") as f:
        return parse_document(f.read())
