"""HTTP facade over the geometry analytics and the convergence runner.

Endpoints accept and return JSON; the heavier artifacts (profile CSV bodies,
the distance CSV) are rendered server-side by the same code the library
uses and shipped verbatim inside the response, so a client that writes them
to disk gets byte-identical files no matter where the run executed.

    GET  /health          liveness and version
    POST /geometry        expansion profiles + boundary-angle sweep
    POST /convergence     full convergence experiment (body: ExperimentConfig)
    POST /haar-reference  build the seeded Haar reference for one register size

Convergence runs execute synchronously in the request; desk-scale configs
take minutes, so clients should disable read timeouts (the bundled CLI
does).
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, field_validator

from .circuits import STREAM_HAAR, derive_seed
from .errors import QdampError
from .experiment import (
    DEFAULT_MASTER_SEED,
    DEFAULT_SWEEP_GAMMAS,
    ExperimentConfig,
    GeometryResult,
    run_convergence,
    run_geometry,
)
from .majorization import haar_reference

try:
    __version__ = version("qdamp")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0.dev"


class GeometryRequest(BaseModel):
    gammas: list[float] = Field(min_length=1)
    resolution: int = Field(default=512, ge=2, le=2_000_001)
    include_sweep: bool = True
    sweep_gammas: list[float] | None = None

    @field_validator("gammas", "sweep_gammas")
    @classmethod
    def _in_range(cls, value):
        if value is None:
            return value
        for g in value:
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"every gamma must lie in [0, 1], got {g}")
        return [float(g) for g in value]


class ProfilePayload(BaseModel):
    gamma: float
    theta_c: float | None
    lambda_north: float
    lambda_south: float | None
    csv: str
    json_doc: dict


class SweepRow(BaseModel):
    gamma: float
    theta_c: float | None


class GeometryResponse(BaseModel):
    profiles: list[ProfilePayload]
    sweep: list[SweepRow]
    sweep_csv: str | None


class ConvergenceResponse(BaseModel):
    config: dict
    config_hash: str
    depths: list[int]
    gammas: list[float]
    haar_seed: int
    distance_csv: str
    json_doc: dict
    wall_seconds: float


class HaarReferenceRequest(BaseModel):
    qubits: int = Field(ge=1, le=10)
    m_haar: int = Field(default=3000, ge=2)
    master_seed: int = Field(default=DEFAULT_MASTER_SEED, ge=0, lt=1 << 64)


class HaarReferenceResponse(BaseModel):
    d: int
    m_haar: int
    master_seed: int
    haar_seed: int
    sdl: list[float]
    json_doc: dict


def _geometry_response(result: GeometryResult) -> GeometryResponse:
    profiles = [
        ProfilePayload(
            gamma=rec.profile.gamma,
            theta_c=rec.profile.theta_c,
            lambda_north=rec.lambda_north,
            lambda_south=rec.lambda_south,
            csv=rec.profile.to_csv(),
            json_doc=rec.to_json_doc(),
        )
        for rec in result.profiles
    ]
    sweep = [SweepRow(gamma=g, theta_c=tc) for g, tc in result.sweep]
    return GeometryResponse(
        profiles=profiles,
        sweep=sweep,
        sweep_csv=result.sweep_csv() if result.sweep else None,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="qdamp", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/geometry", response_model=GeometryResponse)
    def geometry(req: GeometryRequest) -> GeometryResponse:
        sweep_gammas = (
            req.sweep_gammas if req.sweep_gammas is not None else DEFAULT_SWEEP_GAMMAS
        )
        try:
            result = run_geometry(
                req.gammas,
                req.resolution,
                sweep_gammas=sweep_gammas,
                include_sweep=req.include_sweep,
            )
        except QdampError as exc:
            raise HTTPException(
                status_code=400,
                detail={"error": type(exc).__name__, "message": str(exc)},
            ) from exc
        return _geometry_response(result)

    @app.post("/convergence", response_model=ConvergenceResponse)
    def convergence(cfg: ExperimentConfig) -> ConvergenceResponse:
        try:
            result = run_convergence(cfg)
        except QdampError as exc:
            raise HTTPException(
                status_code=400,
                detail={"error": type(exc).__name__, "message": str(exc)},
            ) from exc
        return ConvergenceResponse(
            config=result.config.model_dump(),
            config_hash=result.config_hash,
            depths=result.depths,
            gammas=[s.gamma for s in result.series],
            haar_seed=result.haar.seed,
            distance_csv=result.distance_csv(),
            json_doc=result.sdl_json_doc(),
            wall_seconds=result.wall_seconds,
        )

    @app.post("/haar-reference", response_model=HaarReferenceResponse)
    def haar_ref(req: HaarReferenceRequest) -> HaarReferenceResponse:
        d = 1 << req.qubits
        seed = derive_seed(req.master_seed, STREAM_HAAR)
        ref = haar_reference(d, req.m_haar, seed)
        return HaarReferenceResponse(
            d=d,
            m_haar=req.m_haar,
            master_seed=req.master_seed,
            haar_seed=seed,
            sdl=[float(x) for x in ref.sdl],
            json_doc=ref.to_json_doc(),
        )

    return app


app = create_app()
