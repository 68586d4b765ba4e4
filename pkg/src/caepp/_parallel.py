import os
from concurrent.futures import ProcessPoolExecutor

WORKERS_ENV = "CAEPP_WORKERS"


def resolve_workers(workers=None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def parallel_map(fn, items, workers=None) -> list:
    """Ordered map; results come back in input order whatever the scheduling."""
    items = list(items)
    n = resolve_workers(workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
