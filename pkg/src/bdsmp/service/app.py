"""HTTP API over the expansion engine.

A thin translation layer: requests name a model (preset or inline
descriptor), handlers call the library, responses carry the same tabular
data the CLI writes as CSV.  Domain errors map onto a structured envelope
whose ``code`` mirrors the CLI exit codes (config / precision / range).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..csvio import package_version
from ..errors import BdsmpError
from ..figures import reproduce_tables
from ..tables import (
    compare_rows,
    exact_rows,
    expand_rows,
    load_intensity,
    load_model,
    simulate_rows,
)
from .schemas import (
    CompareRequest,
    ExactRequest,
    ExpandRequest,
    HealthResponse,
    ReproduceRequest,
    SimulateRequest,
    Table,
    TableResponse,
    TablesResponse,
)


def _model_args(req) -> tuple:
    ref = req.model
    descriptor = ref.descriptor.model_dump() if ref.descriptor is not None else None
    return ref.preset, descriptor


def _table(name: str, command: str, digest: str, data) -> Table:
    columns, rows = data
    return Table(
        name=name,
        columns=list(columns),
        rows=[list(r) for r in rows],
        model_digest=digest,
        command=command,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="bdsmp", version=package_version())

    @app.exception_handler(BdsmpError)
    async def _domain_error(request: Request, exc: BdsmpError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": {"code": exc.api_code, "message": str(exc)}},
        )

    @app.get("/v1/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=package_version())

    @app.post("/v1/expand", response_model=TableResponse)
    def expand(req: ExpandRequest) -> TableResponse:
        model = load_model(*_model_args(req), req.L)
        data = expand_rows(model, req.L, req.states)
        return TableResponse(
            table=_table("expand", "expand", model.digest(), data),
            version=package_version(),
        )

    @app.post("/v1/exact", response_model=TableResponse)
    def exact(req: ExactRequest) -> TableResponse:
        model = load_model(*_model_args(req), 1)
        data = exact_rows(model, req.eps, req.states)
        return TableResponse(
            table=_table("exact", "exact", model.digest(), data),
            version=package_version(),
        )

    @app.post("/v1/compare", response_model=TableResponse)
    def compare(req: CompareRequest) -> TableResponse:
        model = load_model(*_model_args(req), req.L)
        data = compare_rows(model, req.L, req.eps, req.states)
        return TableResponse(
            table=_table("compare", "compare", model.digest(), data),
            version=package_version(),
        )

    @app.post("/v1/simulate", response_model=TableResponse)
    def simulate(req: SimulateRequest) -> TableResponse:
        model = load_intensity(*_model_args(req))
        data = simulate_rows(
            model,
            req.eps,
            horizon=req.horizon,
            seed=req.seed,
            replications=req.replications,
            start=req.start,
        )
        return TableResponse(
            table=_table("simulate", "simulate", model.digest(), data),
            version=package_version(),
        )

    @app.post("/v1/reproduce", response_model=TablesResponse)
    def reproduce(req: ReproduceRequest) -> TablesResponse:
        names = req.figures
        if names is None:
            panels = reproduce_tables()
        else:
            # panels of distinct figures are independent work items
            with ThreadPoolExecutor(max_workers=min(7, len(names))) as pool:
                groups = list(pool.map(lambda f: reproduce_tables([f]), names))
            panels = [t for group in groups for t in group]
        tables = [
            Table(
                name=p.name,
                columns=list(p.columns),
                rows=[list(r) for r in p.rows],
                model_digest=p.model_digest,
                command="reproduce",
            )
            for p in panels
        ]
        return TablesResponse(tables=tables, version=package_version())

    return app
