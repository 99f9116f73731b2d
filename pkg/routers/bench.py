"""Benchmark post-processing endpoints."""

import logging

from fastapi import APIRouter

from schemas import ProfileRequest, ProfileResponse
from services.bench import RunRecord, common_convergence_filter, nonconvergence_counts, performance_profile

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/profile", response_model=ProfileResponse)
async def profile(request: ProfileRequest) -> ProfileResponse:
    """Performance profile of the posted records, by default over commonly converged instances."""
    records = [RunRecord(**r.model_dump()) for r in request.records]
    selected = common_convergence_filter(records) if request.common_only else records
    if not selected:
        logger.warning("Profile request left no records after the common-convergence filter")
    table = performance_profile(selected, request.metric)
    table.extra["nonconvergences"] = nonconvergence_counts(records)
    return ProfileResponse(**table.to_dict())
