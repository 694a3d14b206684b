from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from weakjoint.config import get_settings

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Apply `fn` to every item on a thread pool, returning results in input order.

    numpy and scipy release the GIL inside dense kernels, so threads give real
    speedups for per-point eigendecompositions. With one thread the map runs inline.
    """
    items = list(items)
    threads = get_settings().threads if threads is None else threads
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
