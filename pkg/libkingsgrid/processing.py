'''Worker pool and chunking helpers shared by grid scans, curve walks and t-ladders'''

from typing import Any, Callable, Iterable, Iterator, List, Optional, Tuple
from concurrent.futures import ThreadPoolExecutor
from tqdm import tqdm
from libkingsgrid.logs import start_logger

logger = start_logger(__name__)


class WorkerPool:
    '''Ordered map over a thread pool; a single thread runs inline'''

    def __init__(self, threads: int = 1, progress: bool = False, description: Optional[str] = None):
        if threads < 1:
            raise ValueError("Thread count must be at least 1, got {}.".format(threads))
        self.threads = threads
        self.progress = progress
        self.description = description
        self._executor = None

    def __enter__(self):
        if self.threads > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.threads)
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map(self, function: Callable[[Any], Any], items: Iterable[Any], description: Optional[str] = None) -> List[Any]:
        '''Results in input order whatever the completion order'''
        items = list(items)
        label = description or self.description
        if self.threads == 1 or len(items) < 2:
            iterator = tqdm(items, desc=label, disable=not self.progress)
            return [function(item) for item in iterator]
        owned = self._executor is None
        executor = self._executor or ThreadPoolExecutor(max_workers=self.threads)
        try:
            results = executor.map(function, items)
            return list(tqdm(results, total=len(items), desc=label, disable=not self.progress))
        finally:
            if owned:
                executor.shutdown(wait=True)

    def __repr__(self):
        return 'WorkerPool(threads={})'.format(self.threads)


def serial_pool() -> WorkerPool:
    return WorkerPool(1)


def chunks(total: int, size: int) -> Iterator[Tuple[int, int]]:
    """Half-open index ranges covering range(total) in pieces of at most size"""
    size = max(1, int(size))
    for start in range(0, total, size):
        yield start, min(total, start + size)
