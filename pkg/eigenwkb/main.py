from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
import time
import logging
from datetime import datetime

from eigenwkb import __version__
from eigenwkb.config import settings
from eigenwkb.models.schemas import (
    HealthResponse, OperatorModel, PhiRequest, PhiResponse, PolyModel, SeriesRequest, SeriesResponse,
    SolveRequest, SolveResponse, ValidateRequest, ValidateResponse, ViolationModel,
)
from eigenwkb.services import branch_geometry as bg
from eigenwkb.services.expansion_series import series_tables
from eigenwkb.services.experiments import cached_context, cached_eigenpair
from eigenwkb.services.operator_core import ExactlySolvableOperator, eigenpoly, ensure_valid, validate
from eigenwkb.services.poly_core import Mode, exact
from eigenwkb.utils.codec import format_real, operator_from_json, parse_point, poly_to_json, scalar_to_json
from eigenwkb.utils.errors import EigenWKBError, InvalidOperator
from eigenwkb.utils.log_setup import setup_logging

setup_logging()
logger = logging.getLogger(__name__)

app = FastAPI(
    title="EigenWKB API",
    description="Eigenpolynomials of exactly solvable operators and their WKB-type asymptotics",
    version=__version__,
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


def load_operator(model: OperatorModel, mode: Mode = Mode.RATIONAL, bits: int = None) -> ExactlySolvableOperator:
    try:
        op = operator_from_json(model.model_dump(), mode, bits)
    except (ValueError, ZeroDivisionError) as e:
        raise HTTPException(status_code=422, detail=f"Malformed operator: {e}")
    return op


def to_http_error(e: Exception) -> HTTPException:
    if isinstance(e, HTTPException):
        return e
    if isinstance(e, InvalidOperator):
        return HTTPException(status_code=422, detail=str(e))
    if isinstance(e, EigenWKBError):
        return HTTPException(status_code=400, detail=str(e))
    logger.exception("Unexpected error")
    return HTTPException(status_code=500, detail=f"Processing failed: {str(e)}")


@app.get("/")
async def root():
    return {"message": "Welcome to the EigenWKB API. Visit /docs for API documentation."}


@app.get("/health", response_model=HealthResponse)
async def health_check():
    """Health check endpoint"""
    return HealthResponse(
        status="healthy",
        version=__version__,
        timestamp=datetime.now()
    )


@app.get("/scenarios")
async def scenarios():
    """Built-in scenarios and experiments of the harness"""
    return {
        "scenarios": settings.SCENARIOS,
        "experiments": settings.EXPERIMENTS,
        "default_bits": settings.DEFAULT_BITS,
        "harness_bits": settings.HARNESS_BITS,
    }


@app.post("/validate", response_model=ValidateResponse)
async def validate_operator(request: ValidateRequest):
    """Structural checks of an exactly solvable operator"""
    op = load_operator(request.operator)
    violations = validate(op)
    return ValidateResponse(
        valid=not violations,
        violations=[ViolationModel(k=v.k, condition=v.condition, detail=v.detail) for v in violations],
    )


@app.post("/solve", response_model=SolveResponse)
async def solve(request: SolveRequest):
    """Monic eigenpolynomial Q_n and its eigenvalue"""
    start_time = time.time()
    try:
        mode = Mode(request.mode)
        bits = request.bits or settings.DEFAULT_BITS
        op = ensure_valid(load_operator(request.operator, mode, bits))
        logger.info("Solving for Q_%d (%s mode)", request.n, mode.value)
        pair = cached_eigenpair(op, request.n) if mode == Mode.RATIONAL else eigenpoly(op, request.n)
        return SolveResponse(
            n=pair.n,
            eigenvalue=scalar_to_json(pair.eigenvalue, bits),
            Q=PolyModel(**poly_to_json(pair.Q)),
            epsilon=scalar_to_json(pair.epsilon, bits) if pair.epsilon is not None else None,
            processing_time=time.time() - start_time,
        )
    except Exception as e:
        raise to_http_error(e)


@app.post("/phi", response_model=PhiResponse)
async def phi(request: PhiRequest):
    """Phi0 or Phi1 at a point outside the hull, with its quadrature error"""
    start_time = time.time()
    try:
        bits = request.bits or settings.DEFAULT_BITS
        op = ensure_valid(load_operator(request.operator))
        ctx = cached_context(op, bits)
        z = exact(parse_point(request.z))
        result = bg.phi0(z, ctx) if request.order == 0 else bg.phi1(z, ctx)
        return PhiResponse(
            order=request.order,
            value=scalar_to_json(result.value, bits),
            error=format_real(result.error, bits),
            processing_time=time.time() - start_time,
        )
    except Exception as e:
        raise to_http_error(e)


@app.post("/series", response_model=SeriesResponse)
async def series(request: SeriesRequest):
    """gamma, q and h tables of the eigenvalue expansion, exact"""
    try:
        op = ensure_valid(load_operator(request.operator))
        tables = series_tables(op, request.order)
        return SeriesResponse(
            order=tables.order,
            gamma=[scalar_to_json(g) for g in tables.gamma],
            q=[[scalar_to_json(v) for v in row] for row in tables.q],
            h=[scalar_to_json(v) for v in tables.h],
        )
    except Exception as e:
        raise to_http_error(e)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host=settings.API_HOST, port=settings.API_PORT)
