"""Memoised builders safe to call from worker threads.

Several checks of a suite run concurrently and compare the objects they get back
(algebras, frames, module presentations) by identity, so an entry must be built
exactly once per process.
"""

import threading
from collections.abc import Callable
from functools import cache, wraps
from typing import ParamSpec, TypeVar

P = ParamSpec("P")
R = TypeVar("R")

# one re-entrant lock for all builders, which call one another
_lock = threading.RLock()


def shared_cache(func: Callable[P, R]) -> Callable[P, R]:
    cached = cache(func)

    @wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
        with _lock:
            return cached(*args, **kwargs)

    wrapper.cache_clear = cached.cache_clear  # type: ignore[attr-defined]
    return wrapper
