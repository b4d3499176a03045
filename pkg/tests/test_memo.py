import time
from concurrent.futures import ThreadPoolExecutor

from ncgeo.infrastructure.memo import shared_cache


def test_entry_is_built_once_across_threads():
    calls = []

    @shared_cache
    def build(key: int) -> object:
        calls.append(key)
        time.sleep(0.01)
        return object()

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(build, [3] * 16))
    assert calls == [3]
    assert all(r is results[0] for r in results)


def test_builders_may_call_each_other():
    @shared_cache
    def inner(n: int) -> int:
        return n + 1

    @shared_cache
    def outer(n: int) -> int:
        return inner(n) * 2

    with ThreadPoolExecutor(max_workers=4) as pool:
        assert list(pool.map(outer, [1, 2, 1, 2])) == [4, 6, 4, 6]
