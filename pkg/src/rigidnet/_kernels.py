"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen once at import time from the ``RIGIDNET_NUMBA``
environment variable: ``"0"`` forces the numpy fallback, anything else
(or an importable numba) selects the jitted kernels.  Both backends are
deterministic for a fixed input array; they are *not* required to agree
bit for bit with each other, only to machine precision.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "clamp_sum",
    "campaign_chunk_stats",
    "histogram_chunk",
    "new_stat_block",
    "warmup",
]

# Row layout of a campaign statistics block (rows x sectors):
# 0 profit sum, 1 profit sumsq, 2 default count, 3/4 tau min/max,
# 5/6 eps min/max, 7/8 profit min/max, 9 tau sum, 10 tau sumsq,
# 11 eps sum, 12 eps sumsq.
STAT_ROWS = 13


def new_stat_block(n: int) -> np.ndarray:
    block = np.zeros((STAT_ROWS, n))
    block[3] = block[5] = block[7] = np.inf
    block[4] = block[6] = block[8] = -np.inf
    return block


def _numpy_clamp_sum(tau, eps, x, lo_factor):
    # sum over draws of min(max(x*tau, lo_factor*eps), x*eps)
    return float(np.sum(np.minimum(np.maximum(x * tau, lo_factor * eps), x * eps)))


def _numpy_campaign_chunk_stats(tau, eps, profit, out):
    defaults = tau < eps
    out[0] += profit.sum(axis=0)
    out[1] += (profit * profit).sum(axis=0)
    out[2] += defaults.sum(axis=0)
    np.minimum(out[3], tau.min(axis=0), out=out[3])
    np.maximum(out[4], tau.max(axis=0), out=out[4])
    np.minimum(out[5], eps.min(axis=0), out=out[5])
    np.maximum(out[6], eps.max(axis=0), out=out[6])
    np.minimum(out[7], profit.min(axis=0), out=out[7])
    np.maximum(out[8], profit.max(axis=0), out=out[8])
    out[9] += tau.sum(axis=0)
    out[10] += (tau * tau).sum(axis=0)
    out[11] += eps.sum(axis=0)
    out[12] += (eps * eps).sum(axis=0)


def _numpy_histogram_chunk(values, lo, inv_width, counts):
    bins = counts.shape[1]
    for k in range(values.shape[1]):
        idx = ((values[:, k] - lo[k]) * inv_width[k]).astype(np.int64)
        np.clip(idx, 0, bins - 1, out=idx)
        counts[k, :] += np.bincount(idx, minlength=bins).astype(np.int64)


def _build_numba_kernels():
    from numba import njit

    @njit(cache=True, nogil=True)
    def clamp_sum(tau, eps, x, lo_factor):
        s = 0.0
        for i in range(tau.shape[0]):
            v = x * tau[i]
            lo = lo_factor * eps[i]
            hi = x * eps[i]
            if v < lo:
                v = lo
            elif v > hi:
                v = hi
            s += v
        return s

    @njit(cache=True, nogil=True)
    def campaign_chunk_stats(tau, eps, profit, out):
        m, n = tau.shape
        for i in range(m):
            for k in range(n):
                t = tau[i, k]
                e = eps[i, k]
                p = profit[i, k]
                out[0, k] += p
                out[1, k] += p * p
                if t < e:
                    out[2, k] += 1.0
                if t < out[3, k]:
                    out[3, k] = t
                if t > out[4, k]:
                    out[4, k] = t
                if e < out[5, k]:
                    out[5, k] = e
                if e > out[6, k]:
                    out[6, k] = e
                if p < out[7, k]:
                    out[7, k] = p
                if p > out[8, k]:
                    out[8, k] = p
                out[9, k] += t
                out[10, k] += t * t
                out[11, k] += e
                out[12, k] += e * e

    @njit(cache=True, nogil=True)
    def histogram_chunk(values, lo, inv_width, counts):
        m, n = values.shape
        bins = counts.shape[1]
        for i in range(m):
            for k in range(n):
                idx = int((values[i, k] - lo[k]) * inv_width[k])
                if idx < 0:
                    idx = 0
                elif idx >= bins:
                    idx = bins - 1
                counts[k, idx] += 1

    return clamp_sum, campaign_chunk_stats, histogram_chunk


def _select_backend():
    numpy_impl = (
        _numpy_clamp_sum,
        _numpy_campaign_chunk_stats,
        _numpy_histogram_chunk,
    )
    if os.environ.get("RIGIDNET_NUMBA", "1") == "0":
        return "numpy", numpy_impl
    try:
        return "numba", _build_numba_kernels()
    except ImportError:
        return "numpy", numpy_impl


BACKEND, (clamp_sum, campaign_chunk_stats, histogram_chunk) = _select_backend()


def warmup():
    """Trigger JIT compilation on tiny inputs so timed runs stay clean."""
    tau = np.array([[1.0, 2.0]])
    eps = np.array([[1.5, 1.5]])
    clamp_sum(tau[:, 0].copy(), eps[:, 0].copy(), 1.0, 0.5)
    campaign_chunk_stats(tau, eps, tau - eps, new_stat_block(2))
    histogram_chunk(tau, np.zeros(2), np.ones(2), np.zeros((2, 4), dtype=np.int64))
