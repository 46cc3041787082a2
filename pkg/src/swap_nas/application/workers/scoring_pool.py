# src/application/workers/scoring_pool.py
"""
Bounded-concurrency runner for independent scoring jobs.

Jobs run in worker threads under a semaphore; results come back in submission
order whatever the completion order, so callers reduce them deterministically.
"""
from __future__ import annotations

import asyncio
import logging
from typing import Callable, Generic, Optional, Sequence, TypeVar

from pydantic import BaseModel, ConfigDict

from swap_nas.domain.exceptions.base_exception import AppBaseException
from swap_nas.domain.utilities.config import settings

logger = logging.getLogger(__name__)

T = TypeVar("T")


class JobResult(BaseModel, Generic[T]):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    index: int
    value: Optional[T] = None
    error: Optional[AppBaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


async def _run_jobs(jobs: Sequence[Callable[[], T]], threads: int) -> list[JobResult[T]]:
    sem = asyncio.Semaphore(threads)

    async def _run_one(index: int, job: Callable[[], T]) -> JobResult[T]:
        async with sem:
            try:
                return JobResult(index=index, value=await asyncio.to_thread(job))
            except AppBaseException as exc:
                logger.debug(f"Scoring job {index} failed: {exc.detail}")
                return JobResult(index=index, error=exc)

    return list(await asyncio.gather(*[_run_one(i, job) for i, job in enumerate(jobs)]))


def run_jobs(jobs: Sequence[Callable[[], T]], threads: int | None = None) -> list[JobResult[T]]:
    """
    Run `jobs` with at most `threads` in flight. Domain errors are captured per
    job; anything else propagates.
    """
    threads = max(1, threads or settings.SCORING_THREADS)
    if threads == 1:
        results = []
        for index, job in enumerate(jobs):
            try:
                results.append(JobResult(index=index, value=job()))
            except AppBaseException as exc:
                logger.debug(f"Scoring job {index} failed: {exc.detail}")
                results.append(JobResult(index=index, error=exc))
        return results
    return asyncio.run(_run_jobs(jobs, threads))
