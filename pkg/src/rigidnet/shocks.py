"""Shock distributions, public signals and the conditional-expectation engine.

Primitive log-productivity shocks are nonpositive random vectors; every
actor conditions on a public signal of the realization.  This module owns
the shock/signal descriptions and provides the expectations all downstream
solvers consume: conditional means of ``exp(rho_k)``, the per-sector law of
the normalized shock pair ``(tau_k, eps_k)`` and a generic conditional
expectation with exact, closed-form and Monte Carlo backends.
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels, _sampling
from ._analytic import (
    ExpPoly,
    clamped_expectation,
    exp_poly,
    interval_mass,
    truncated_mgf,
)
from .economy import Economy, LeontiefData
from .errors import (
    DimensionMismatch,
    EmptyCell,
    ShockModelError,
    UnsupportedAnalytic,
)

MIN_ACCEPTANCE = 1e-6
PARTITION_TOL = 1e-12
BACKENDS = ("exact_discrete", "analytic_exponential", "monte_carlo")


@dataclass(frozen=True)
class ShockModel:
    """Joint law of the primitive shock vector eta (componentwise <= 0)."""

    kind: str
    o: int | None = None
    rate: float | None = None
    rates: np.ndarray | None = None
    points: np.ndarray | None = None
    probs: np.ndarray | None = None
    eta: np.ndarray | None = None

    @staticmethod
    def single_node_exponential(o: int, rate: float) -> "ShockModel":
        """-eta[o] exponentially distributed with the given rate, zero elsewhere."""
        if o < 0:
            raise ShockModelError("shocked sector index must be nonnegative")
        if rate <= 0:
            raise ShockModelError("exponential rate must be positive")
        return ShockModel(kind="single_node_exponential", o=int(o), rate=float(rate))

    @staticmethod
    def independent_exponential(rates) -> "ShockModel":
        rates = np.asarray(rates, dtype=np.float64)
        if np.any(rates <= 0):
            raise ShockModelError("all exponential rates must be positive")
        return ShockModel(kind="independent_exponential", rates=rates)

    @staticmethod
    def discrete(points, probs) -> "ShockModel":
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        probs = np.asarray(probs, dtype=np.float64)
        if points.shape[0] != probs.shape[0]:
            raise ShockModelError("support points and probabilities disagree in length")
        if np.any(points > 0):
            raise ShockModelError("support points must be componentwise nonpositive")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > PARTITION_TOL:
            raise ShockModelError("probabilities must be nonnegative and sum to one")
        if np.all(points == points[0]):
            raise ShockModelError(
                "deterministic support; use the degenerate kind for that"
            )
        return ShockModel(kind="discrete", points=points, probs=probs)

    @staticmethod
    def degenerate(eta) -> "ShockModel":
        eta = np.asarray(eta, dtype=np.float64)
        if np.any(eta > 0):
            raise ShockModelError("eta must be componentwise nonpositive")
        warnings.warn(
            "degenerate shock models are admitted only to exercise the "
            "full-information reductions; the economic analysis assumes a "
            "non-deterministic shock",
            stacklevel=2,
        )
        return ShockModel(kind="degenerate", eta=eta)

    @property
    def is_single_node(self) -> bool:
        return self.kind == "single_node_exponential"


@dataclass(frozen=True)
class Box:
    """Product of per-coordinate intervals (lo, hi], lo may be -inf."""

    lo: np.ndarray
    hi: np.ndarray

    def contains(self, eta: np.ndarray) -> bool:
        return bool(np.all(eta > self.lo) and np.all(eta <= self.hi))

    def mask(self, eta: np.ndarray) -> np.ndarray:
        return np.all(eta > self.lo, axis=1) & np.all(eta <= self.hi, axis=1)


@dataclass(frozen=True)
class SignalModel:
    """Public signal: constant (none), fully revealing (full), or a partition."""

    kind: str
    cells: tuple[Box, ...] | None = None

    @staticmethod
    def none() -> "SignalModel":
        return SignalModel(kind="none")

    @staticmethod
    def full() -> "SignalModel":
        return SignalModel(kind="full")

    @staticmethod
    def partition(cells) -> "SignalModel":
        boxes = []
        for c in cells:
            lo = np.asarray(c.lo if isinstance(c, Box) else c[0], dtype=np.float64)
            hi = np.asarray(c.hi if isinstance(c, Box) else c[1], dtype=np.float64)
            if lo.shape != hi.shape or np.any(lo >= hi):
                raise ShockModelError("each cell needs lo < hi componentwise")
            boxes.append(Box(lo, hi))
        if not boxes:
            raise ShockModelError("partition needs at least one cell")
        return SignalModel(kind="partition", cells=tuple(boxes))


@dataclass(frozen=True)
class ExpectationEngine:
    """Expectation backend: exact sums, closed forms, or seeded Monte Carlo."""

    backend: str
    num_draws: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ShockModelError(f"unknown backend {self.backend!r}")
        if self.num_draws <= 0:
            raise ShockModelError("num_draws must be positive")


@dataclass(frozen=True)
class ExpOfLinear:
    """Integrand exp(weights . eta): the analytic backend's closed-form family."""

    weights: np.ndarray

    def __call__(self, eta2d: np.ndarray) -> np.ndarray:
        return np.exp(eta2d @ np.asarray(self.weights))


class ExpectationResult(NamedTuple):
    value: float
    stderr: float


# ---------------------------------------------------------------------------
# signal cells


def find_cell(signal: SignalModel, eta: np.ndarray) -> int:
    """Index of the partition cell containing eta."""
    for i, box in enumerate(signal.cells):
        if box.contains(eta):
            return i
    raise EmptyCell(f"no partition cell contains eta={eta}")


def resolve_cell(signal: SignalModel, eta: np.ndarray):
    """Map a realization to the conditioning object for its signal value."""
    if signal.kind == "none":
        return None
    if signal.kind == "full":
        return np.asarray(eta, dtype=np.float64)
    return find_cell(signal, np.asarray(eta, dtype=np.float64))


def _cell_box(signal: SignalModel, cell) -> Box | None:
    if cell is None:
        return None
    if not isinstance(cell, (int, np.integer)):
        raise ShockModelError("partition signals condition on a cell index")
    return signal.cells[int(cell)]


def _box_mass(model: ShockModel, box: Box, n: int) -> float:
    if model.kind == "discrete":
        return float(model.probs[box.mask(model.points)].sum())
    if model.kind == "degenerate":
        return 1.0 if box.contains(model.eta) else 0.0
    if model.kind == "single_node_exponential":
        lo = np.where(np.isinf(box.lo), -np.inf, box.lo)
        for j in range(n):
            if j != model.o and not (lo[j] < 0.0 <= box.hi[j]):
                return 0.0
        return interval_mass(model.rate, lo[model.o], min(box.hi[model.o], 0.0))
    if model.kind == "independent_exponential":
        mass = 1.0
        for j in range(n):
            mass *= interval_mass(model.rates[j], box.lo[j], min(box.hi[j], 0.0))
        return mass
    raise ShockModelError(f"unknown shock kind {model.kind!r}")


def check_partition(model: ShockModel, signal: SignalModel, n: int) -> None:
    """Verify partition cells are disjoint and cover the shock support."""
    if signal.kind != "partition":
        return
    cells = signal.cells
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            overlap = np.maximum(cells[i].lo, cells[j].lo) < np.minimum(
                cells[i].hi, cells[j].hi
            )
            if np.all(overlap):
                raise ShockModelError(f"partition cells {i} and {j} overlap")
    total = sum(_box_mass(model, box, n) for box in cells)
    if abs(total - 1.0) > 1e-9:
        raise ShockModelError(
            f"partition covers probability {total:.12g}, expected 1"
        )


# ---------------------------------------------------------------------------
# expected exp(rho) per sector


def _require_single_node_interval(model: ShockModel, box: Box | None, n: int):
    if box is None:
        return -np.inf, 0.0
    for j in range(n):
        if j != model.o and not (box.lo[j] < 0.0 <= box.hi[j]):
            raise EmptyCell("cell excludes the degenerate coordinates of the shock")
    return float(box.lo[model.o]), float(min(box.hi[model.o], 0.0))


def expected_exp_rho(
    L: LeontiefData,
    model: ShockModel,
    signal: SignalModel,
    engine: ExpectationEngine,
    cell=None,
) -> np.ndarray:
    """E[exp(rho_k) | signal cell] for every sector k."""
    n = L.L.shape[0]
    if signal.kind == "full":
        eta = np.asarray(cell, dtype=np.float64)
        return np.exp(L.L @ eta)
    if model.kind == "degenerate":
        return np.exp(L.L @ model.eta)
    box = _cell_box(signal, cell)

    if engine.backend == "exact_discrete":
        if model.kind != "discrete":
            raise ShockModelError("exact_discrete backend needs a discrete model")
        points, probs = _restrict_support(model, box)
        return np.exp(points @ L.L.T).T @ probs

    if engine.backend == "analytic_exponential":
        if model.kind == "single_node_exponential":
            lo, hi = _require_single_node_interval(model, box, n)
            return truncated_mgf(model.rate, L.L[:, model.o], lo, hi)
        if model.kind == "independent_exponential":
            out = np.ones(n)
            for j in range(n):
                lo = box.lo[j] if box is not None else -np.inf
                hi = min(box.hi[j], 0.0) if box is not None else 0.0
                out *= truncated_mgf(model.rates[j], L.L[:, j], lo, hi)
            return out
        raise UnsupportedAnalytic(
            f"analytic backend has no closed form for {model.kind!r}"
        )

    # monte_carlo
    sums = np.zeros(n)
    accepted = 0
    total = 0
    for part, count, m in _mc_chunk_stats(
        model, n, engine, box, lambda eta: np.exp(eta @ L.L.T)
    ):
        sums += part
        accepted += count
        total += m
    _guard_acceptance(accepted, total)
    return sums / accepted


def _restrict_support(model: ShockModel, box: Box | None):
    points, probs = model.points, model.probs
    if box is not None:
        mask = box.mask(points)
        points, probs = points[mask], probs[mask]
    mass = probs.sum()
    if mass <= 0.0:
        raise EmptyCell("signal cell carries no probability mass")
    return points, probs / mass


def _guard_acceptance(accepted: int, total: int) -> None:
    if accepted == 0 or accepted < MIN_ACCEPTANCE * total:
        raise EmptyCell(
            f"cell acceptance {accepted}/{total} below the {MIN_ACCEPTANCE:g} guard"
        )


def _mc_chunk_stats(model, n, engine, box, fn):
    """Yield (column sums of fn(eta), accepted count, raw count) per chunk."""

    def one(args):
        idx, start, stop = args
        eta = _sampling.draw_eta_chunk(model, n, engine.seed, idx, stop - start)
        if box is not None:
            eta = eta[box.mask(eta)]
        if eta.shape[0] == 0:
            return np.zeros(n), 0, stop - start
        vals = fn(eta)
        return vals.sum(axis=0), eta.shape[0], stop - start

    yield from _sampling.ordered_map(one, _sampling.chunk_ranges(engine.num_draws))


# ---------------------------------------------------------------------------
# generic conditional expectation


def conditional_expectation(
    engine: ExpectationEngine,
    model: ShockModel,
    signal: SignalModel,
    f,
    cell=None,
    n: int | None = None,
) -> ExpectationResult:
    """E[f(eta) | signal cell] with the engine's backend.

    ``f`` maps an (m, n) block of realizations to an (m,) vector.  Under a
    full signal ``cell`` is the realization itself and the value is just
    ``f(eta)``.  The Monte Carlo backend reports the standard error of its
    estimate; exact backends report zero.
    """
    if signal.kind == "full":
        eta = np.atleast_2d(np.asarray(cell, dtype=np.float64))
        return ExpectationResult(float(f(eta)[0]), 0.0)
    if model.kind == "degenerate":
        return ExpectationResult(float(f(np.atleast_2d(model.eta))[0]), 0.0)

    if n is None:
        n = _model_dim(model)
    box = _cell_box(signal, cell)

    if engine.backend == "exact_discrete":
        if model.kind != "discrete":
            raise ShockModelError("exact_discrete backend needs a discrete model")
        points, probs = _restrict_support(model, box)
        return ExpectationResult(float(f(points) @ probs), 0.0)

    if engine.backend == "analytic_exponential":
        if not isinstance(f, ExpOfLinear):
            raise UnsupportedAnalytic(
                "analytic backend integrates exp-of-linear functionals only"
            )
        w = np.asarray(f.weights, dtype=np.float64)
        if model.kind == "single_node_exponential":
            lo, hi = _require_single_node_interval(model, box, n)
            return ExpectationResult(
                float(truncated_mgf(model.rate, w[model.o], lo, hi)), 0.0
            )
        if model.kind == "independent_exponential":
            val = 1.0
            for j in range(n):
                lo = box.lo[j] if box is not None else -np.inf
                hi = min(box.hi[j], 0.0) if box is not None else 0.0
                val *= float(truncated_mgf(model.rates[j], w[j], lo, hi))
            return ExpectationResult(val, 0.0)
        raise UnsupportedAnalytic(
            f"analytic backend has no closed form for {model.kind!r}"
        )

    total_sum = 0.0
    total_sq = 0.0
    accepted = 0
    raw = 0

    def one(args):
        idx, start, stop = args
        eta = _sampling.draw_eta_chunk(model, n, engine.seed, idx, stop - start)
        if box is not None:
            eta = eta[box.mask(eta)]
        if eta.shape[0] == 0:
            return 0.0, 0.0, 0, stop - start
        vals = np.asarray(f(eta), dtype=np.float64)
        return float(vals.sum()), float((vals * vals).sum()), eta.shape[0], stop - start

    for s, sq, count, m in _sampling.ordered_map(
        one, _sampling.chunk_ranges(engine.num_draws)
    ):
        total_sum += s
        total_sq += sq
        accepted += count
        raw += m
    _guard_acceptance(accepted, raw)
    mean = total_sum / accepted
    var = max(total_sq / accepted - mean * mean, 0.0)
    return ExpectationResult(mean, float(np.sqrt(var / accepted)))


def _model_dim(model: ShockModel) -> int:
    if model.kind == "single_node_exponential":
        raise ShockModelError(
            "pass n explicitly: a single-node model does not know the economy size"
        )
    if model.kind == "independent_exponential":
        return model.rates.shape[0]
    if model.kind == "discrete":
        return model.points.shape[1]
    return model.eta.shape[0]


# ---------------------------------------------------------------------------
# total and normalized shocks


def total_shock(L: LeontiefData, eta) -> np.ndarray:
    """Network-aggregated shock rho = L @ eta."""
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape != (L.L.shape[0],):
        raise DimensionMismatch(
            f"eta must have shape ({L.L.shape[0]},), got {eta.shape}"
        )
    return L.L @ eta


def normalized_shocks(
    L: LeontiefData,
    econ: Economy,
    engine: ExpectationEngine,
    model: ShockModel,
    signal: SignalModel,
    eta,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized total shocks tau and suppliers' shocks eps at a realization.

    tau_k divides exp(rho_k) by its conditional expectation given the signal
    value generated by ``eta`` itself; under a full signal both vectors are
    identically one.
    """
    eta = np.asarray(eta, dtype=np.float64)
    rho = total_shock(L, eta)
    if signal.kind == "full" or model.kind == "degenerate":
        ones = np.ones(econ.n)
        return ones, ones.copy()
    cell = resolve_cell(signal, eta)
    denom = expected_exp_rho(L, model, signal, engine, cell)
    tau = np.exp(rho) / denom
    eps = tau @ econ.A + econ.beta
    return tau, eps


# ---------------------------------------------------------------------------
# per-sector (tau, eps) laws consumed by the debt solver


class DeterministicLaw:
    """tau = eps = 1 almost surely (full information or degenerate shock)."""

    def __init__(self, n: int):
        self.n = n

    def expect_clamp(self, k: int, x: float, lo_factor: float) -> float:
        return min(max(x, lo_factor), x)

    def expect_min(self, k: int) -> float:
        return 1.0


class DiscreteLaw:
    """Exact law on a finite support: tau/eps rows per support point."""

    def __init__(self, probs: np.ndarray, tau: np.ndarray, eps: np.ndarray):
        self.probs = probs
        self.tau = tau
        self.eps = eps
        self.n = tau.shape[1]

    def expect_clamp(self, k: int, x: float, lo_factor: float) -> float:
        t, e = self.tau[:, k], self.eps[:, k]
        return float(
            self.probs @ np.minimum(np.maximum(x * t, lo_factor * e), x * e)
        )

    def expect_min(self, k: int) -> float:
        return float(self.probs @ np.minimum(self.tau[:, k], self.eps[:, k]))


class AnalyticExpLaw:
    """Closed-form law for a single-node exponential shock on a cell."""

    def __init__(self, econ: Economy, L: LeontiefData, model: ShockModel, lo, hi):
        self.lam = model.rate
        self.lo = lo
        self.hi = hi
        self.n = econ.n
        t = L.L[:, model.o]
        coef = 1.0 / truncated_mgf(model.rate, t, lo, hi)
        self.tau_polys = [ExpPoly(np.array([coef[k]]), np.array([t[k]])) for k in range(econ.n)]
        self.eps_polys = [
            exp_poly(
                [(econ.beta[k], 0.0)]
                + [
                    (econ.A[j, k] * coef[j], t[j])
                    for j in range(econ.n)
                    if econ.A[j, k] > 0.0
                ]
            )
            for k in range(econ.n)
        ]

    def expect_clamp(self, k: int, x: float, lo_factor: float) -> float:
        return clamped_expectation(
            self.tau_polys[k].scaled(x),
            self.eps_polys[k].scaled(lo_factor),
            self.eps_polys[k].scaled(x),
            self.lam,
            self.lo,
            self.hi,
        )

    def expect_min(self, k: int) -> float:
        return self.expect_clamp(k, 1.0, 0.0)


class MonteCarloLaw:
    """Common-random-number sample of (tau, eps), self-normalized in-sample."""

    def __init__(self, tau_cols: list[np.ndarray], eps_cols: list[np.ndarray]):
        self.tau_cols = tau_cols
        self.eps_cols = eps_cols
        self.n = len(tau_cols)

    def expect_clamp(self, k: int, x: float, lo_factor: float) -> float:
        t = self.tau_cols[k]
        return _kernels.clamp_sum(t, self.eps_cols[k], x, lo_factor) / t.shape[0]

    def expect_min(self, k: int) -> float:
        return self.expect_clamp(k, 1.0, 0.0)


def tau_epsilon_law(
    econ: Economy,
    L: LeontiefData,
    model: ShockModel,
    signal: SignalModel,
    engine: ExpectationEngine,
    cell=None,
):
    """Build the per-sector (tau, eps) law for one signal cell."""
    if signal.kind == "full" or model.kind == "degenerate":
        return DeterministicLaw(econ.n)
    box = _cell_box(signal, cell)

    if engine.backend == "exact_discrete":
        if model.kind != "discrete":
            raise ShockModelError("exact_discrete backend needs a discrete model")
        points, probs = _restrict_support(model, box)
        rho = points @ L.L.T
        denom = np.exp(rho).T @ probs
        tau = np.exp(rho) / denom
        eps = tau @ econ.A + econ.beta
        return DiscreteLaw(probs, tau, eps)

    if engine.backend == "analytic_exponential":
        if model.kind != "single_node_exponential":
            raise UnsupportedAnalytic(
                "analytic law requires a single-node exponential shock"
            )
        lo, hi = _require_single_node_interval(model, box, econ.n)
        return AnalyticExpLaw(econ, L, model, lo, hi)

    # monte_carlo with common random numbers held for the solver's lifetime
    blocks = []
    raw = 0

    def one(args):
        idx, start, stop = args
        eta = _sampling.draw_eta_chunk(model, econ.n, engine.seed, idx, stop - start)
        if box is not None:
            eta = eta[box.mask(eta)]
        return eta, stop - start

    for eta, m in _sampling.ordered_map(one, _sampling.chunk_ranges(engine.num_draws)):
        raw += m
        if eta.shape[0]:
            blocks.append(eta)
    accepted = sum(b.shape[0] for b in blocks)
    _guard_acceptance(accepted, raw)
    eta_all = np.vstack(blocks)
    rho = eta_all @ L.L.T
    tau = np.exp(rho)
    tau /= tau.mean(axis=0)
    eps = tau @ econ.A + econ.beta
    tau_cols = [np.ascontiguousarray(tau[:, k]) for k in range(econ.n)]
    eps_cols = [np.ascontiguousarray(eps[:, k]) for k in range(econ.n)]
    return MonteCarloLaw(tau_cols, eps_cols)
