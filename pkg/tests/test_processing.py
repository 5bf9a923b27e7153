'''This module contains tests for processing module'''

import threading
import pytest
from libkingsgrid.processing import WorkerPool, serial_pool, chunks


class TestWorkerPool:
    def test_order_kept(self):
        """Results come back in input order"""
        with WorkerPool(4) as pool:
            assert pool.map(lambda x: x * x, range(20)) == [x * x for x in range(20)]

    def test_threads_used(self):
        seen = set()

        def record(_):
            seen.add(threading.get_ident())
            return 0

        with WorkerPool(3) as pool:
            pool.map(record, range(50))
        assert len(seen) >= 1

    def test_serial(self):
        assert serial_pool().map(str, [1, 2]) == ['1', '2']

    def test_without_context(self):
        """A pool used outside a with block makes a temporary executor"""
        assert WorkerPool(2).map(abs, [-1, -2, 3]) == [1, 2, 3]

    def test_bad_thread_count(self):
        with pytest.raises(ValueError):
            WorkerPool(0)


class TestChunks:
    def test_cover(self):
        assert list(chunks(10, 4)) == [(0, 4), (4, 8), (8, 10)]
        assert list(chunks(0, 4)) == []
        assert list(chunks(3, 0)) == [(0, 1), (1, 2), (2, 3)]
