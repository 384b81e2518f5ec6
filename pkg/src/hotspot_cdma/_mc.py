"""Seeding and work distribution shared by the Monte Carlo drivers.

Every unit of work (a user placement, a hotspot selection) draws from a
generator derived from ``(seed, tag, index...)`` through
:class:`numpy.random.SeedSequence`, so results never depend on how the
units are spread over worker processes.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

# stream tags; keep stable, changing them changes every seeded result
PLACEMENT = 1
SELECTION = 2
STATS = 3
RESAMPLE = 4


def generators(seed: int, *key: int, n: int) -> list[np.random.Generator]:
    """``n`` independent generators for the work unit identified by ``key``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return [np.random.default_rng(child) for child in ss.spawn(n)]


def chunked(n_items: int, n_chunks: int) -> list[range]:
    n_chunks = max(1, min(n_chunks, n_items))
    edges = np.linspace(0, n_items, n_chunks + 1).astype(int)
    return [range(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_chunks(fn, n_items: int, workers: int = 1, *args):
    """Evaluate ``fn(chunk, *args)`` over contiguous index chunks, in order."""
    if workers <= 1 or n_items <= 1:
        return [fn(range(n_items), *args)]
    chunks = chunked(n_items, workers * 4)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks, *([a] * len(chunks) for a in args)))


@dataclass(frozen=True)
class CapacityResult:
    """Largest supported population and the outage trace that produced it.

    ``trace`` maps each evaluated N to its estimated outage probability.
    """

    n_star: int
    trace: dict = field(default_factory=dict)
    method: str = "simulation"
    seed: int | None = None

    @property
    def outage_at_n_star(self) -> float:
        return self.trace.get(self.n_star, 0.0)


def scan_capacity(outage_of, target: float, n_start: int = 1, n_max: int | None = None,
                  method: str = "linear") -> tuple[int, dict]:
    """Largest N with ``outage_of(N) <= target``, assuming outage is nondecreasing in N.

    ``linear`` steps one user at a time from ``n_start`` (up while the target
    is met, down otherwise); from ``n_start=1`` it is the plain upward scan.
    ``bisect`` brackets by doubling and bisects, which evaluates far fewer
    populations when N* is in the hundreds.
    """
    trace: dict[int, float] = {}

    def ok(n):
        if n not in trace:
            trace[n] = float(outage_of(n))
        return trace[n] <= target

    n = max(1, int(n_start))
    if n_max is not None:
        n = min(n, n_max)
    if method == "linear":
        if ok(n):
            while (n_max is None or n < n_max) and ok(n + 1):
                n += 1
            return n, dict(sorted(trace.items()))
        while n > 1 and not ok(n - 1):
            n -= 1
        return n - 1, dict(sorted(trace.items()))
    if method != "bisect":
        raise ValueError(f"unknown scan method {method!r}")
    if ok(n):
        lo, hi = n, None
        step = max(1, n // 8)
        while hi is None:
            cand = lo + step if n_max is None else min(lo + step, n_max)
            if cand == lo:
                return lo, dict(sorted(trace.items()))
            if ok(cand):
                lo, step = cand, step * 2
            else:
                hi = cand
    else:
        lo, hi = 0, n
        step = max(1, n // 8)
        while lo == 0:
            cand = hi - step
            if cand < 1:
                break
            if ok(cand):
                lo = cand
            else:
                hi, step = cand, step * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo, dict(sorted(trace.items()))
