import logging
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Tuple

import numpy as np

from exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)


def chunk_bounds(reps: int, chunk_size: int) -> List[Tuple[int, int]]:
    """Contiguous [start, stop) ranges covering 0..reps."""
    if reps < 1:
        raise InvalidArgumentError(f"reps must be at least 1, got {reps}")
    if chunk_size < 1:
        raise InvalidArgumentError(f"chunk_size must be at least 1, got {chunk_size}")
    return [(start, min(start + chunk_size, reps)) for start in range(0, reps, chunk_size)]


def run_replications(
    task: Callable[..., np.ndarray],
    reps: int,
    workers: int = 1,
    chunk_size: int = 500,
    **kwargs: Any,
) -> np.ndarray:
    """
    Evaluate ``task(start, stop, **kwargs)`` over chunks of replication
    indices and concatenate the chunk results in index order.

    ``task`` must be a module-level function so it can be sent to worker
    processes. With ``workers <= 1`` everything runs in this process.
    """
    bounds = chunk_bounds(reps, chunk_size)
    started = time.time()
    logger.info(f"Running {reps} replications of {task.__name__} in {len(bounds)} chunk(s) on {max(workers, 1)} worker(s)")

    if workers <= 1 or len(bounds) == 1:
        parts = [task(start, stop, **kwargs) for start, stop in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(task, start, stop, **kwargs) for start, stop in bounds]
            parts = [future.result() for future in futures]

    logger.info(f"Finished {reps} replications of {task.__name__} in {time.time() - started:.2f}s")
    return np.concatenate(parts, axis=0)
