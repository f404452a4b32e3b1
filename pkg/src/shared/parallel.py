"""스레드 풀 기반 병렬 map (ENDCALC_THREADS로 상한 제어)"""

import logging
import threading
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from src.config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

_local = threading.local()


def in_worker() -> bool:
    """현재 스레드가 parallel_map 작업 중인지 여부"""
    return getattr(_local, "active", False)


def _run_marked(fn: Callable[[T], R], item: T) -> R:
    _local.active = True
    try:
        return fn(item)
    finally:
        _local.active = False


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """입력 순서를 보존하는 병렬 map

    이미 작업 스레드 안에서 호출되면 순차 실행한다 (풀은 한 층만).
    """
    seq = list(items)
    workers = min(get_settings().worker_count, max(len(seq), 1))
    if workers <= 1 or len(seq) <= 1 or in_worker():
        return [fn(item) for item in seq]

    logger.debug(f"parallel_map: {len(seq)} items on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda item: _run_marked(fn, item), seq))
