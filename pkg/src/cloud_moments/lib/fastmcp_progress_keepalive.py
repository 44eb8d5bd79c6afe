"""Progress heartbeats for MCP tools whose computation runs in a worker thread.

The heartbeat reports indeterminate progress (elapsed seconds, no total)
until the computation returns.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
import random
import threading
import time
from typing import AsyncIterator, Callable, TypeVar

from fastmcp import Context

logger = logging.getLogger(__name__)

T = TypeVar("T")

# mpmath keeps its working precision in one process-wide context.
_compute_lock = threading.Lock()


async def _heartbeat(ctx: Context, started: float, interval: float, jitter: float) -> None:
    while True:
        await ctx.report_progress(progress=round(time.monotonic() - started, 1))
        await asyncio.sleep(max(0.1, interval + random.uniform(-jitter, jitter)))


@contextlib.asynccontextmanager
async def progress_keepalive(ctx: Context, *, interval: float = 30.0, jitter: float = 5.0) -> AsyncIterator[None]:
    """Report progress every ``interval ± jitter`` seconds while the body runs."""
    started = time.monotonic()
    task = asyncio.create_task(_heartbeat(ctx, started, interval, jitter))
    try:
        yield
    finally:
        task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await task
        logger.debug("tool computation finished after %.1fs", time.monotonic() - started)


def _locked(fn: Callable[[], T]) -> T:
    with _compute_lock:
        return fn()


async def run_blocking(ctx: Context, fn: Callable[[], T], *, interval: float = 30.0) -> T:
    """Run ``fn`` in a worker thread, one computation at a time, with heartbeats meanwhile."""
    async with progress_keepalive(ctx, interval=interval):
        return await asyncio.to_thread(_locked, fn)
