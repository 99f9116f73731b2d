"""Problem catalog endpoints."""

import logging

from fastapi import APIRouter, HTTPException, Query, status
from starlette.concurrency import run_in_threadpool

from schemas import DerivativeCheckResponse, ProblemInfo
from services.cone import ContractViolation
from services.problem import check_problem
from services.suite import UnknownProblemError, catalog, instantiate

logger = logging.getLogger(__name__)

router = APIRouter()


@router.get("", response_model=list[ProblemInfo])
async def list_problems() -> list[ProblemInfo]:
    """Catalog names with their (n, m) variants, initial-point boxes and derivative kind."""
    infos = []
    for spec in catalog():
        n, m = spec.variants[0]
        infos.append(
            ProblemInfo(
                name=spec.name,
                variants=spec.variants,
                domain={str(n): spec.box(n) for n, _ in spec.variants},
                derivatives=instantiate(spec.name, n, m).derivative_kind,
                note=spec.note,
            )
        )
    return infos


@router.get("/{name}/check", response_model=DerivativeCheckResponse)
async def check_derivatives(
    name: str,
    n: int | None = Query(None, ge=1),
    m: int | None = Query(None, ge=1),
    points: int = Query(20, ge=1, le=1000),
    tol: float = Query(1e-5, gt=0),
    seed: int = 0,
) -> DerivativeCheckResponse:
    """Compare analytic derivatives against finite differences at random domain points."""
    try:
        problem = instantiate(name, n, m)
    except UnknownProblemError as e:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(e))

    try:
        summary = await run_in_threadpool(check_problem, problem, points, tol, seed)
    except ContractViolation as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))

    logger.info(f"Derivative check {problem.name}: passed={summary.passed}")
    return DerivativeCheckResponse(
        problem=problem.name,
        n=problem.n,
        m=problem.m,
        points=summary.points,
        tol=summary.tol,
        max_jacobian_error=summary.max_jacobian_error,
        max_hessian_error=summary.max_hessian_error,
        passed=summary.passed,
    )
