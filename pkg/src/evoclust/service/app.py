"""FastAPI application: dataset registry plus clustering endpoints.

Datasets are immutable once registered. Clustering runs are serialized per
dataset id so the UI always observes the result of the parameters it last
sent; different datasets may cluster concurrently.
"""

from __future__ import annotations

import itertools
import threading
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..data import DataError, Dataset, ScalerKind, SyntheticSpec, generate, loads_dataset, scale
from ..engine import ClusterConfig, ConfigError, DegenerateDataset, RunReport, cluster
from ..metrics import ari, nmi
from .schemas import (
    ApiError,
    ClusterRequest,
    ClusterResponse,
    DatasetCreated,
    DatasetInfo,
    DatasetUpload,
    Health,
    PointsResponse,
)

MAX_DISPLAY_POINTS = 20_000


class SessionState:
    """In-memory dataset table; nothing survives a restart."""

    def __init__(self) -> None:
        self._datasets: dict[str, Dataset] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._reports: dict[str, RunReport] = {}
        self._counter = itertools.count(1)
        self._registry_lock = threading.Lock()

    def register(self, ds: Dataset) -> str:
        with self._registry_lock:
            ds_id = f"ds-{next(self._counter):04d}"
            self._datasets[ds_id] = ds
            self._locks[ds_id] = threading.Lock()
        return ds_id

    def get(self, ds_id: str) -> Optional[Dataset]:
        return self._datasets.get(ds_id)

    def lock(self, ds_id: str) -> threading.Lock:
        return self._locks[ds_id]

    def remember_report(self, ds_id: str, report: RunReport) -> None:
        self._reports[ds_id] = report

    def last_report(self, ds_id: str) -> Optional[RunReport]:
        return self._reports.get(ds_id)

    def items(self):
        return list(self._datasets.items())


def _error(status: int, message: str, field: Optional[str] = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content=ApiError(error=message, field=field).model_dump(),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="evoclust tuning service", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = SessionState()
    app.state.session = state

    @app.exception_handler(RequestValidationError)
    async def _validation_handler(request: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        loc = [str(p) for p in first.get("loc", []) if p != "body"]
        field = loc[-1] if loc else None
        return _error(400, first.get("msg", "invalid request"), field)

    @app.get("/health", response_model=Health)
    def health() -> Health:
        return Health()

    @app.post("/datasets", response_model=DatasetCreated, status_code=201)
    def create_dataset(upload: DatasetUpload):
        try:
            if upload.generator is not None:
                spec = SyntheticSpec(
                    kind=upload.generator.kind,
                    n_points=upload.generator.n_points,
                    noise=upload.generator.noise,
                    seed=upload.generator.seed,
                )
                ds = generate(spec)
                if upload.name:
                    ds = Dataset(
                        values=ds.values,
                        labels=ds.labels,
                        name=upload.name,
                        development=ds.development,
                    )
            else:
                ds = loads_dataset(
                    upload.csv, label_column=upload.label_column, name=upload.name or "upload"
                )
            ds = scale(ds, ScalerKind(upload.scaler))
        except DataError as exc:
            return _error(400, str(exc))
        ds_id = state.register(ds)
        return DatasetCreated(
            id=ds_id, name=ds.name, n=ds.n, d=ds.dim, has_truth=ds.labels is not None
        )

    @app.get("/datasets", response_model=list[DatasetInfo])
    def list_datasets():
        return [
            DatasetInfo(
                id=ds_id,
                name=ds.name,
                n=ds.n,
                d=ds.dim,
                has_truth=ds.labels is not None,
                scaler=ds.scaler_applied.value,
            )
            for ds_id, ds in state.items()
        ]

    @app.get("/datasets/{ds_id}/points", response_model=PointsResponse)
    def dataset_points(ds_id: str, dims: str = "0,1"):
        ds = state.get(ds_id)
        if ds is None:
            return _error(404, f"unknown dataset {ds_id}")
        try:
            parts = [int(p) for p in dims.split(",")]
        except ValueError:
            return _error(400, f"dims must be two comma-separated integers, got {dims!r}", "dims")
        if len(parts) == 1:
            parts = [parts[0], parts[0]]
        if len(parts) != 2:
            return _error(400, "dims must name exactly two coordinates", "dims")
        i, j = parts
        if not (0 <= i < ds.dim and 0 <= j < ds.dim):
            return _error(400, f"dims out of range for dimensionality {ds.dim}", "dims")
        if ds.n > MAX_DISPLAY_POINTS:
            sel = np.unique(np.linspace(0, ds.n - 1, MAX_DISPLAY_POINTS).astype(np.int64))
        else:
            sel = np.arange(ds.n)
        truth = ds.labels[sel].tolist() if ds.labels is not None else None
        return PointsResponse(
            id=ds_id,
            dims=(i, j),
            x=ds.values[sel, i].tolist(),
            y=ds.values[sel, j].tolist(),
            truth=truth,
            indices=sel.tolist(),
            n_total=ds.n,
            displayed=int(sel.shape[0]),
        )

    @app.post("/datasets/{ds_id}/cluster", response_model=ClusterResponse)
    def cluster_dataset(ds_id: str, request: ClusterRequest):
        ds = state.get(ds_id)
        if ds is None:
            return _error(404, f"unknown dataset {ds_id}")
        cfg = ClusterConfig(**request.model_dump())
        try:
            with state.lock(ds_id):
                labeling, report = cluster(ds, cfg)
        except ConfigError as exc:
            return _error(400, str(exc), exc.field)
        except DegenerateDataset as exc:
            return _error(400, str(exc))
        state.remember_report(ds_id, report)
        score = ari(ds.labels, labeling.labels) if ds.labels is not None else None
        info = nmi(ds.labels, labeling.labels) if ds.labels is not None else None
        return ClusterResponse(
            id=ds_id,
            labels=labeling.labels.tolist(),
            n_clusters=labeling.n_clusters,
            n_noise=report.n_noise,
            cluster_sizes=report.cluster_sizes,
            runtime_s=report.runtime_s,
            ari=score,
            nmi=info,
            config=request,
        )

    @app.get("/datasets/{ds_id}/report")
    def last_report(ds_id: str):
        if state.get(ds_id) is None:
            return _error(404, f"unknown dataset {ds_id}")
        report = state.last_report(ds_id)
        if report is None:
            return _error(404, f"no clustering run recorded for {ds_id}")
        return report.to_dict()

    return app


app = create_app()
