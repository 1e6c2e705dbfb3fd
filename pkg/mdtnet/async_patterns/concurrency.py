import asyncio
import logging
import os
from collections.abc import Callable, Iterable
from typing import Any, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)

WORKERS_ENV = "MDT_NUM_WORKERS"


def workers_from_env(default: int = 0) -> int:
    """Background data-loading workers from MDT_NUM_WORKERS; 0 loads on the calling thread."""
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {WORKERS_ENV}={raw!r}")
        return default
    return max(0, value)


class ParallelExecutor:
    """
    Helper to run blocking file writes (PNG encoding) in parallel with a concurrency limit.

    Results always come back in submission order, so callers that feed a
    deterministic pipeline stay deterministic regardless of the worker count.

    Usage:
        executor = ParallelExecutor(limit=4)
        executor.map_ordered(write_sample, jobs)
    """

    def __init__(self, limit: int = 1):
        if limit < 1:
            raise ValueError("limit must be >= 1")
        self.limit = limit

    @staticmethod
    async def gather_limited(limit: int, tasks: list[Callable[[], Any]]) -> list[Any]:
        """
        Execute a list of blocking callables in worker threads with at most `limit` in flight.

        The returned list is aligned with `tasks`.
        """
        sem = asyncio.Semaphore(limit)

        async def _wrapped(task_func: Callable[[], Any]) -> Any:
            async with sem:
                return await asyncio.to_thread(task_func)

        return await asyncio.gather(*[_wrapped(t) for t in tasks])

    def map_ordered(self, func: Callable[[T], R], items: Iterable[T]) -> list[R]:
        """
        Apply `func` to every item and return the results in input order.

        With a limit of 1 the work runs inline on the calling thread.
        Must not be called from inside a running event loop when limit > 1.
        """
        items = list(items)
        if self.limit == 1 or len(items) <= 1:
            return [func(item) for item in items]

        tasks = [lambda item=item: func(item) for item in items]
        return asyncio.run(self.gather_limited(self.limit, tasks))
