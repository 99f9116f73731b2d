"""Single-run solve endpoint."""

import logging

from fastapi import APIRouter, HTTPException, status
from starlette.concurrency import run_in_threadpool

from schemas import IterationOut, SolveRequest, SolveResponse
from services.baselines import SolverOptions, UnknownSolverError, get_solver
from services.cone import ContractViolation
from services.suite import UnknownProblemError, instantiate, resolve_cone

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("", response_model=SolveResponse)
async def solve(request: SolveRequest) -> SolveResponse:
    """
    Run one solver from one initial point.

    Unknown problems and solvers give 404; a cone or x0 that does not fit the
    problem gives 422.
    """
    try:
        problem = instantiate(request.problem, request.n, request.m)
        solver = get_solver(request.solver)
    except (UnknownProblemError, UnknownSolverError) as e:
        raise HTTPException(status_code=status.HTTP_404_NOT_FOUND, detail=str(e))

    if len(request.x0) != problem.n:
        raise HTTPException(
            status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
            detail=f"x0 must have {problem.n} coordinates, got {len(request.x0)}",
        )
    try:
        cone = resolve_cone(request.cone, problem.m)
    except ContractViolation as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(e))

    options = SolverOptions(trust_region=request.trust_region, steepest_descent=request.steepest_descent)
    try:
        result = await run_in_threadpool(solver, problem, cone, request.x0, options)
    except NotImplementedError as e:
        raise HTTPException(status_code=status.HTTP_501_NOT_IMPLEMENTED, detail=str(e))

    logger.info(f"Solved {problem.name} with {request.solver}: {result.status.value} after {result.iterations}")
    return SolveResponse(
        problem=problem.name,
        solver=request.solver,
        status=result.status.value,
        iterations=result.iterations,
        final_x=result.x,
        final_t=result.final_t,
        theta=result.final_t,
        descent_violations=result.descent_violations,
        trace=[
            IterationOut(
                k=r.k,
                status=r.status.value,
                t=r.t,
                omega=r.omega,
                step_length=r.step_length,
                rho_min=r.rho_min,
                rho_max=r.rho_max,
                x=r.x,
            )
            for r in result.trace
        ],
    )
