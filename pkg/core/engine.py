"""
MULTIPOLY Engine
Worker pool shared by multi-start searches and experiment scans
"""

import threading
import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum, auto
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class EngineState(Enum):
    """Engine operational states"""
    STOPPED = auto()
    RUNNING = auto()
    STOPPING = auto()


class Engine:
    """
    Thin wrapper around a thread pool

    Results always come back in submission order, so callers that merge by
    index get the same answer whatever the schedule was. Tasks must be pure
    and carry their own random generator.
    """

    def __init__(self, max_workers: Optional[int] = None):
        if max_workers is None:
            from config import MAX_WORKERS
            max_workers = MAX_WORKERS
        self._max_workers = max(1, int(max_workers))
        self._state = EngineState.STOPPED
        self._executor: Optional[ThreadPoolExecutor] = None
        self._lock = threading.Lock()

    @property
    def state(self) -> EngineState:
        return self._state

    @property
    def max_workers(self) -> int:
        return self._max_workers

    def _ensure_executor(self) -> ThreadPoolExecutor:
        with self._lock:
            if self._executor is None:
                self._executor = ThreadPoolExecutor(
                    max_workers=self._max_workers,
                    thread_name_prefix="multipoly",
                )
                self._state = EngineState.RUNNING
                logger.debug(f"Engine started with {self._max_workers} worker(s)")
            return self._executor

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """Apply fn to every item; ordered results"""
        items = list(items)
        if self._max_workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        executor = self._ensure_executor()
        return list(executor.map(fn, items))

    def shutdown(self):
        """Stop the pool; a later map() starts a fresh one"""
        with self._lock:
            if self._executor is None:
                return
            self._state = EngineState.STOPPING
            self._executor.shutdown(wait=True)
            self._executor = None
            self._state = EngineState.STOPPED
            logger.debug("Engine shutdown complete")


# Global engine instance
_engine_instance: Optional[Engine] = None


def get_engine() -> Engine:
    """Get or create global engine instance"""
    global _engine_instance
    if _engine_instance is None:
        _engine_instance = Engine()
    return _engine_instance
