# mlacrb/sweep.py: order-preserving parallel map for parameter sweeps

import logging
from concurrent.futures import ThreadPoolExecutor

__all__ = ["parallel_map"]

logger = logging.getLogger(__name__)


def parallel_map(func, items, threads=1):
    """Return ``[func(item) for item in items]``, computed on ``threads`` workers.

    Results come back in input order whatever the thread count, so sweeps
    are reproducible.  numpy releases the GIL inside the heavy kernels, which
    is what makes threads worthwhile here.
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    workers = min(int(threads), len(items))
    logger.debug("mapping %d items on %d threads", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
