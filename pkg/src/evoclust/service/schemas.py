"""Pydantic request/response models for the tuning service."""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator

from ..data import GENERATOR_KINDS

GeneratorKind = Literal[
    "density_gradient",
    "rectangle",
    "ejected_mass",
    "small_line",
    "fixed_density_blobs",
    "varying_density_blobs",
    "circles",
    "moons",
    "gradient_50d",
]

assert set(GeneratorKind.__args__) == set(GENERATOR_KINDS)


class GeneratorRequest(BaseModel):
    kind: GeneratorKind
    n_points: int = Field(default=500, ge=2, le=100_000)
    noise: Optional[float] = Field(default=None, ge=0.0)
    seed: int = 0


class DatasetUpload(BaseModel):
    """Either inline CSV text or a generator spec; exactly one of the two."""

    name: Optional[str] = None
    csv: Optional[str] = None
    label_column: Optional[Union[int, str]] = None
    generator: Optional[GeneratorRequest] = None
    scaler: Literal["minmax", "standard", "none"] = "minmax"

    @model_validator(mode="after")
    def _one_source(self) -> "DatasetUpload":
        if (self.csv is None) == (self.generator is None):
            raise ValueError("provide exactly one of 'csv' or 'generator'")
        return self


class DatasetCreated(BaseModel):
    id: str
    name: str
    n: int
    d: int
    has_truth: bool


class DatasetInfo(BaseModel):
    id: str
    name: str
    n: int
    d: int
    has_truth: bool
    scaler: str


class PointsResponse(BaseModel):
    id: str
    dims: tuple[int, int]
    x: list[float]
    y: list[float]
    truth: Optional[list[int]] = None
    indices: list[int]
    n_total: int
    displayed: int


class ClusterRequest(BaseModel):
    level: Literal[1, 2] = 1
    expansion: float = Field(default=0.5, ge=0.0, le=1.0)
    blur: float = Field(default=0.5, ge=0.0, le=1.0)
    max_neighbors: int = Field(default=15, ge=1)
    min_cluster_size: int = Field(default=5, ge=1)
    policy: Literal["reassign", "noise"] = "reassign"
    tau: float = Field(default=0.3, ge=0.0)
    heuristics: Literal["default", "identity"] = "default"
    seeding: Literal["ordered", "random"] = "ordered"
    index: Literal["exact", "accelerated"] = "exact"
    seed: int = 0


class ClusterResponse(BaseModel):
    id: str
    labels: list[int]
    n_clusters: int
    n_noise: int
    cluster_sizes: list[int]
    runtime_s: float
    ari: Optional[float] = None
    nmi: Optional[float] = None
    config: ClusterRequest


class Health(BaseModel):
    status: Literal["ok"] = "ok"


class ApiError(BaseModel):
    error: str
    field: Optional[str] = None
