"""HTTP service wrapping the analysis pipeline.

POST /analyze takes a graph as edge-list text plus the run parameters and
returns the full report; complex numbers travel as [re, im] pairs.  Law
violations are a completed analysis (HTTP 200 with ok=false, status=2);
bad input is HTTP 400.

Run with: uvicorn grovertails.service:app
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .errors import AnalysisError, GroverTailsError
from .pipeline import RunConfig, run


class AnalyzeRequest(BaseModel):
    graph: str = Field(description="edge-list document, one 'u v' pair per line")
    tails: list[int] = Field(min_length=1)
    inflow: list[tuple[float, float]] | None = None
    z: tuple[float, float] = (1.0, 0.0)
    mode: Literal["evolve", "stationary", "spectrum", "scatter", "verify", "all"] = "all"
    steps: int | None = None
    tol: float = 1e-10
    truncation: int | None = None
    seed: int = 0


class AnalyzeResponse(BaseModel):
    ok: bool
    status: int
    report: dict


class HealthResponse(BaseModel):
    status: str
    version: str


def create_app() -> FastAPI:
    app = FastAPI(
        title="grovertails",
        version=__version__,
        description="Driven Grover walk analysis on graphs with semi-infinite tails.",
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(request: AnalyzeRequest) -> AnalyzeResponse:
        config = RunConfig(
            graph_text=request.graph,
            tails=tuple(request.tails),
            inflow=None if request.inflow is None
            else tuple(complex(re, im) for re, im in request.inflow),
            z=complex(*request.z),
            mode=request.mode,
            steps=request.steps,
            tol=request.tol,
            truncation=request.truncation,
            seed=request.seed,
        )
        try:
            result = run(config)
        except AnalysisError as exc:
            raise HTTPException(
                status_code=500,
                detail={"error": type(exc).__name__, "message": str(exc)},
            ) from exc
        except GroverTailsError as exc:
            raise HTTPException(
                status_code=400,
                detail={"error": type(exc).__name__, "message": str(exc)},
            ) from exc
        return AnalyzeResponse(
            ok=result.report["ok"], status=result.exit_code, report=result.report
        )

    return app


app = create_app()
