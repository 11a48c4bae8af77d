"""Small shared helpers: worker pools and seed derivation."""

from __future__ import annotations

import multiprocessing as mp
import os


def resolve_workers(workers: int | None = None) -> int:
    """Worker count with environment override.

    The TVVAR_WORKERS environment variable, when set, overrides any
    configured value; otherwise the given count (default 1) is used.
    """
    env = os.environ.get("TVVAR_WORKERS")
    if env is not None:
        n = int(env)
        if n < 1:
            raise ValueError("TVVAR_WORKERS must be a positive integer")
        return n
    if workers is None:
        return 1
    if workers < 1:
        raise ValueError("workers must be a positive integer")
    return workers


def parallel_map(fn, items, workers: int = 1):
    """Map fn over items, fanning out to a process pool when workers > 1.

    Results come back in input order.  Items and fn must be picklable
    when workers > 1.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    with ctx.Pool(processes=min(workers, len(items))) as pool:
        return pool.map(fn, items)


def derive_seed(base: int, *branch: int) -> int:
    """Deterministic child seed for a (base, branch...) coordinate."""
    h = 0x9E3779B97F4A7C15
    x = (base & 0xFFFFFFFFFFFFFFFF) ^ h
    for b in branch:
        x ^= (b + 1) * h & 0xFFFFFFFFFFFFFFFF
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & 0xFFFFFFFFFFFFFFFF
        x = (x ^ (x >> 27)) * 0x94D049BB133111EB & 0xFFFFFFFFFFFFFFFF
        x ^= x >> 31
    return x & 0x7FFFFFFF
