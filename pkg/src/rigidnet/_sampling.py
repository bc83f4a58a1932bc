"""Deterministic chunked sampling.

Draws are generated in fixed-size chunks; chunk ``i`` of a run with seed
``s`` uses a Philox generator keyed by ``(s, i)``, so the draw stream is a
pure function of ``(seed, chunk index)`` and results are invariant to how
chunks are scheduled across workers.  Reductions always combine chunk
results in chunk-index order.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import ShockModelError

CHUNK_SIZE = 8192


def thread_count() -> int:
    raw = os.environ.get("RIGIDNET_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def chunk_ranges(num_draws: int):
    """Yield (index, start, stop) for the fixed chunk grid."""
    idx = 0
    start = 0
    while start < num_draws:
        stop = min(start + CHUNK_SIZE, num_draws)
        yield idx, start, stop
        idx += 1
        start = stop


def chunk_rng(seed: int, idx: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64(idx)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_eta_chunk(model, n: int, seed: int, idx: int, count: int) -> np.ndarray:
    """Sample one chunk of primitive shock vectors, shape (count, n)."""
    rng = chunk_rng(seed, idx)
    if model.kind == "single_node_exponential":
        eta = np.zeros((count, n))
        eta[:, model.o] = -rng.standard_exponential(count) / model.rate
        return eta
    if model.kind == "independent_exponential":
        return -rng.standard_exponential((count, n)) / model.rates
    if model.kind == "discrete":
        idx_pts = rng.choice(len(model.probs), size=count, p=model.probs)
        return model.points[idx_pts]
    if model.kind == "degenerate":
        return np.tile(model.eta, (count, 1))
    raise ShockModelError(f"cannot sample shock model kind {model.kind!r}")


def ordered_map(fn, items):
    """Map preserving order; threads only when RIGIDNET_THREADS > 1."""
    workers = thread_count()
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
