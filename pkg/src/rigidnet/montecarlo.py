"""Seeded simulation campaigns over shock draws.

Campaigns stream draws in fixed chunks (counter-keyed substreams, see
``_sampling``) through two passes: one accumulating moments, default
counts, cascade signatures and extrema, and one binning histograms on the
recorded ranges.  All reductions run in chunk-index order, so a report is
a pure function of (inputs, seed, num_draws, bins) no matter how many
workers are active.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels, _sampling
from .debt import DebtProfile
from .economy import Economy, LeontiefData
from .equilibrium import Equilibrium
from .errors import DimensionMismatch, EmptyCell, InconsistentProfile
from .shocks import ShockModel, SignalModel

WELFARE_SLACK = 1e-12
SD_BATCHES = 32


@dataclass(frozen=True)
class SectorHistogram:
    edges: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True)
class SimulationReport:
    """Campaign aggregates; vectors are indexed by sector."""

    num_draws: int
    seed: int
    bins: int
    zeta: np.ndarray | None
    xi: np.ndarray | None
    y0: np.ndarray | None
    c0: np.ndarray | None
    profit_mean: np.ndarray
    profit_mean_se: np.ndarray
    profit_sd: np.ndarray
    profit_sd_se: np.ndarray
    default_prob: np.ndarray
    default_prob_se: np.ndarray
    tau_mean: np.ndarray
    tau_mean_se: np.ndarray
    eps_mean: np.ndarray
    eps_mean_se: np.ndarray
    cascade_prob: dict[str, float]
    histograms: dict[str, list[SectorHistogram]]
    welfare_mean: float
    max_welfare_gap: float


def cascade_signature(mask: int, n: int) -> str:
    members = [str(k + 1) for k in range(n) if mask >> k & 1]
    return ",".join(members) if members else "none"


def _per_cell_tables(econ, L, profile, equil, signal):
    """Normalize (profile, equil) into per-cell lookup tables."""
    if signal.kind == "partition":
        profiles = list(profile)
        equils = list(equil)
        if len(profiles) != len(signal.cells) or len(equils) != len(signal.cells):
            raise DimensionMismatch("one profile and equilibrium per cell required")
    else:
        profiles = [profile]
        equils = [equil]
    v = np.vstack([p.v_zeta * e.w for p, e in zip(profiles, equils)])
    eexp = np.vstack([e.expected_exp_rho for e in equils])
    wconst = np.array(
        [-(L.v0 @ p.zeta) - np.log(p.psi) for p in profiles]
    )
    if np.any(wconst > WELFARE_SLACK):
        raise InconsistentProfile(
            "welfare bound violated by the supplied profile: "
            f"max gap {wconst.max():.3g}"
        )
    return profiles, equils, v, eexp, wconst


def run_campaign(
    econ: Economy,
    L: LeontiefData,
    profile,
    equil,
    model: ShockModel,
    signal: SignalModel,
    num_draws: int,
    seed: int,
    bins: int = 64,
) -> SimulationReport:
    """Simulate draws at a solved equilibrium and aggregate the outcomes.

    For partition signals pass one (profile, equilibrium) pair per cell;
    every draw is evaluated with its own cell's quantities.
    """
    n = econ.n
    if n > 62:
        raise DimensionMismatch("cascade signatures support up to 62 sectors")
    profiles, equils, v_cell, eexp_cell, wconst = _per_cell_tables(
        econ, L, profile, equil, signal
    )
    full_info = signal.kind == "full"
    weights = 1 << np.arange(n, dtype=np.int64)

    def chunk_fields(idx, start, stop):
        eta = _sampling.draw_eta_chunk(model, n, seed, idx, stop - start)
        if signal.kind == "partition":
            cell_idx = np.full(eta.shape[0], -1, dtype=np.int64)
            for c, box in enumerate(signal.cells):
                cell_idx[box.mask(eta)] = c
            if np.any(cell_idx < 0):
                raise EmptyCell("draw fell outside every partition cell")
        else:
            cell_idx = np.zeros(eta.shape[0], dtype=np.int64)
        if full_info:
            tau = np.ones_like(eta)
            eps = np.ones_like(eta)
        else:
            rho = eta @ L.L.T
            tau = np.exp(rho) / eexp_cell[cell_idx]
            eps = tau @ econ.A + econ.beta
        profit = (tau - eps) * v_cell[cell_idx]
        logw = eta @ L.v0 + wconst[cell_idx]
        return eta, tau, eps, profit, logw

    def pass_one(args):
        idx, start, stop = args
        _, tau, eps, profit, logw = chunk_fields(idx, start, stop)
        block = _kernels.new_stat_block(n)
        _kernels.campaign_chunk_stats(tau, eps, profit, block)
        masks = (tau < eps).astype(np.int64) @ weights
        vals, counts = np.unique(masks, return_counts=True)
        return block, dict(zip(vals.tolist(), counts.tolist())), float(
            np.exp(logw).sum()
        )

    chunks = list(_sampling.chunk_ranges(num_draws))
    results = _sampling.ordered_map(pass_one, chunks)

    total = _kernels.new_stat_block(n)
    mask_counts: dict[int, int] = {}
    welfare_sum = 0.0
    chunk_profit = []  # (sum, sumsq, count) per chunk, for batch means
    for (block, masks, wsum), (_, start, stop) in zip(results, chunks):
        total[[0, 1, 2, 9, 10, 11, 12]] += block[[0, 1, 2, 9, 10, 11, 12]]
        np.minimum(total[3], block[3], out=total[3])
        np.maximum(total[4], block[4], out=total[4])
        np.minimum(total[5], block[5], out=total[5])
        np.maximum(total[6], block[6], out=total[6])
        np.minimum(total[7], block[7], out=total[7])
        np.maximum(total[8], block[8], out=total[8])
        for m, c in masks.items():
            mask_counts[m] = mask_counts.get(m, 0) + c
        welfare_sum += wsum
        chunk_profit.append((block[0].copy(), block[1].copy(), stop - start))

    M = float(num_draws)
    profit_mean = total[0] / M
    profit_var = np.maximum(total[1] / M - profit_mean**2, 0.0)
    profit_sd = np.sqrt(profit_var)
    tau_mean = total[9] / M
    tau_var = np.maximum(total[10] / M - tau_mean**2, 0.0)
    eps_mean = total[11] / M
    eps_var = np.maximum(total[12] / M - eps_mean**2, 0.0)
    default_prob = total[2] / M

    # batch-means standard error for the profit SD
    B = min(SD_BATCHES, len(chunks))
    batch_sum = np.zeros((B, n))
    batch_sq = np.zeros((B, n))
    batch_cnt = np.zeros(B)
    for i, (s, sq, cnt) in enumerate(chunk_profit):
        b = i * B // len(chunks)
        batch_sum[b] += s
        batch_sq[b] += sq
        batch_cnt[b] += cnt
    with np.errstate(invalid="ignore", divide="ignore"):
        bm = batch_sum / batch_cnt[:, None]
        bv = np.maximum(batch_sq / batch_cnt[:, None] - bm**2, 0.0)
        batch_sd = np.sqrt(bv)
    profit_sd_se = (
        batch_sd.std(axis=0, ddof=1) / np.sqrt(B) if B >= 2 else np.zeros(n)
    )

    # histogram pass on the recorded ranges
    edges = {}
    inv_width = {}
    stat_rows = {"tau": (3, 4), "epsilon": (5, 6), "profit": (7, 8)}
    for name, (rlo, rhi) in stat_rows.items():
        lo = total[rlo].copy()
        hi = total[rhi].copy()
        degenerate = hi - lo <= 0.0
        hi[degenerate] = lo[degenerate] + 1.0
        edges[name] = np.linspace(lo, hi, bins + 1).T  # (n, bins+1)
        inv_width[name] = bins / (hi - lo)

    def pass_two(args):
        idx, start, stop = args
        _, tau, eps, profit, _ = chunk_fields(idx, start, stop)
        out = {
            name: np.zeros((n, bins), dtype=np.int64) for name in stat_rows
        }
        for name, values in (("tau", tau), ("epsilon", eps), ("profit", profit)):
            _kernels.histogram_chunk(
                values, edges[name][:, 0].copy(), inv_width[name], out[name]
            )
        return out

    hist_counts = {
        name: np.zeros((n, bins), dtype=np.int64) for name in stat_rows
    }
    for out in _sampling.ordered_map(pass_two, chunks):
        for name in stat_rows:
            hist_counts[name] += out[name]

    histograms = {
        name: [
            SectorHistogram(edges=edges[name][k], counts=hist_counts[name][k])
            for k in range(n)
        ]
        for name in stat_rows
    }
    cascade_prob = {
        cascade_signature(m, n): c / M for m, c in sorted(mask_counts.items())
    }
    single = signal.kind != "partition"
    return SimulationReport(
        num_draws=num_draws,
        seed=seed,
        bins=bins,
        zeta=np.asarray(profiles[0].zeta) if single else None,
        xi=np.asarray(profiles[0].xi) if single else None,
        y0=np.asarray(equils[0].y0) if single else None,
        c0=np.asarray(equils[0].c0) if single else None,
        profit_mean=profit_mean,
        profit_mean_se=np.sqrt(profit_var / M),
        profit_sd=profit_sd,
        profit_sd_se=np.asarray(profit_sd_se),
        default_prob=default_prob,
        default_prob_se=np.sqrt(default_prob * (1.0 - default_prob) / M),
        tau_mean=tau_mean,
        tau_mean_se=np.sqrt(tau_var / M),
        eps_mean=eps_mean,
        eps_mean_se=np.sqrt(eps_var / M),
        cascade_prob=cascade_prob,
        histograms=histograms,
        welfare_mean=welfare_sum / M,
        max_welfare_gap=float(wconst.max()),
    )


@dataclass(frozen=True)
class DeltaTable:
    """Per-sector differences between two campaign reports (b minus a)."""

    d_zeta: np.ndarray
    d_xi: np.ndarray
    d_y: np.ndarray
    d_c: np.ndarray
    d_default_prob: np.ndarray
    d_profit_sd: np.ndarray


def compare_leverage(a: SimulationReport, b: SimulationReport) -> DeltaTable:
    """Sectorwise deltas of debt costs, quantities and default frequency."""
    if a.default_prob.shape != b.default_prob.shape:
        raise DimensionMismatch("reports cover different sector counts")
    if a.zeta is None or b.zeta is None:
        raise DimensionMismatch("per-cell reports carry no single snapshot")
    return DeltaTable(
        d_zeta=b.zeta - a.zeta,
        d_xi=b.xi - a.xi,
        d_y=b.y0 - a.y0,
        d_c=b.c0 - a.c0,
        d_default_prob=b.default_prob - a.default_prob,
        d_profit_sd=b.profit_sd - a.profit_sd,
    )
