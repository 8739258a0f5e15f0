"""Deterministic chunked execution helpers for quadratic pair scans.

Scans over all sample pairs are evaluated in fixed-size row blocks.  Blocks
may run on a thread pool, but results are always reduced in block order, so
the outcome is bit-identical regardless of the thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")

_ENV_THREADS = "REGULUS_THREADS"


def resolve_threads(requested: int | None = None) -> int:
    """Thread count from the explicit request, the environment, or 1."""
    if requested is not None:
        if requested < 1:
            raise ValueError(f"thread count must be at least 1, got {requested}")
        return int(requested)
    env = os.environ.get(_ENV_THREADS, "").strip()
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"{_ENV_THREADS} must be an integer, got {env!r}") from exc
        if n >= 1:
            return n
    return 1


def block_ranges(n: int, block: int) -> list[tuple[int, int]]:
    """Split ``range(n)`` into consecutive half-open blocks of width ``block``."""
    if block < 1:
        raise ValueError(f"block width must be positive, got {block}")
    return [(lo, min(lo + block, n)) for lo in range(0, n, block)]


def map_blocks(
    fn: Callable[[int, int], T],
    ranges: Sequence[tuple[int, int]],
    threads: int = 1,
) -> list[T]:
    """Apply ``fn(lo, hi)`` to every block, returning results in block order."""
    if threads <= 1 or len(ranges) <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futures]
