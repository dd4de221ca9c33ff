from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

from mcp.server.fastmcp import FastMCP

from .settings import SETTINGS

logging.basicConfig(
    level=getattr(logging, SETTINGS.log_level),
    format="%(asctime)s %(levelname)s %(name)s - %(message)s",
)
logger = logging.getLogger("tempoodd")

mcp = FastMCP(
    name="tempoodd",
    instructions=(
        "Anomaly detection for temporal network sequences. Compute graph features, run the detection "
        "pipeline on edge-list CSVs, simulate synthetic sequences and run the AUC experiments."
    ),
    host=SETTINGS.mcp_host,
    port=SETTINGS.mcp_port,
    log_level=SETTINGS.log_level,
)

_T = TypeVar("_T")
_R = TypeVar("_R")


def _parallel_map(func: Callable[[_T], _R], items: Iterable[_T], *, workers: int | None = None) -> list[_R]:
    """Map ``func`` over ``items`` preserving input order.

    Runs in-process when one worker is configured. ``func`` must be a module-level callable so
    it can be shipped to worker processes.
    """
    materialized = list(items)
    resolved = min(workers or SETTINGS.threads, max(len(materialized), 1))
    if resolved <= 1:
        return [func(item) for item in materialized]
    logger.debug("Dispatching %d tasks to %d worker processes", len(materialized), resolved)
    with ProcessPoolExecutor(max_workers=resolved) as executor:
        return list(executor.map(func, materialized))
