"""Analytic default prediction for single-node shocks.

A sector defaults exactly when its normalized total shock falls below its
suppliers' aggregate, ``tau_k < eps_k``.  For a shock concentrated on one
node the comparison reduces to convexity properties of
``t -> exp(t eta_o) / E[exp(t eta_o) | signal]`` evaluated at Leontief
coefficients, which the exponentially tilted mean/deviation pair
``m1(t) +- sigma(t)`` controls: staying inside the band forces concavity
(no default among lightly exposed sectors), staying outside forces strict
convexity (default everywhere reachable).
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ._analytic import truncated_mgf, truncated_moments
from .economy import Economy, LeontiefData
from .errors import ConvergenceFailure, InvalidAlpha, ShockModelError, UnsupportedShock
from .shocks import Box, ShockModel, SignalModel

NEVER = "NEVER"
NO_DEFAULT = "NO_DEFAULT"
DEFAULT = "DEFAULT"
UNDETERMINED = "UNDETERMINED"

GRID_POINTS = 256
DENSE_FACTOR = 16
BOUNDARY_TOL = 1e-9
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class TiltedMoments:
    """Mean, second moment and deviation of the exponentially tilted shock."""

    m1: callable
    m2: callable
    mgf: callable

    def sigma(self, t):
        m1 = self.m1(t)
        return np.sqrt(np.maximum(self.m2(t) - m1 * m1, 0.0))


def single_node_origin(model: ShockModel) -> int:
    """Index of the unique shocked sector; UnsupportedShock otherwise."""
    if model.kind == "single_node_exponential":
        return model.o
    if model.kind == "discrete":
        nonzero = np.any(model.points < 0.0, axis=0)
        if nonzero.sum() == 1:
            return int(np.flatnonzero(nonzero)[0])
        raise UnsupportedShock("discrete support touches more than one sector")
    raise UnsupportedShock(f"{model.kind!r} is not a single-node shock model")


def tilted_moments(
    model: ShockModel, signal: SignalModel | None = None, cell=None
) -> TiltedMoments:
    """Tilted moments of eta_o; exact for exponential and discrete models."""
    o = single_node_origin(model)
    lo, hi = -np.inf, 0.0
    if signal is not None and signal.kind == "partition":
        box: Box = signal.cells[int(cell)]
        lo, hi = float(box.lo[o]), float(min(box.hi[o], 0.0))
    if signal is not None and signal.kind == "full":
        raise UnsupportedShock("classification under full information is vacuous")

    if model.kind == "single_node_exponential":
        lam = model.rate

        def m1(t):
            if np.isinf(lo):
                return -1.0 / (np.asarray(t) + lam)
            return _trunc_m(lam, t, lo, hi, 1)

        def m2(t):
            if np.isinf(lo):
                return 2.0 / (np.asarray(t) + lam) ** 2
            return _trunc_m(lam, t, lo, hi, 2)

        def mgf(t):
            return truncated_mgf(lam, t, lo, hi)

        return TiltedMoments(m1=m1, m2=m2, mgf=mgf)

    # discrete, concentrated on o
    values = model.points[:, o]
    probs = model.probs
    keep = (values > lo) & (values <= hi)
    if not keep.any():
        raise ShockModelError("signal cell carries no support points")
    values, probs = values[keep], probs[keep] / probs[keep].sum()

    def weights(t):
        t = np.asarray(t, dtype=np.float64)
        logs = np.multiply.outer(t, values) + np.log(probs)
        logs -= logs.max(axis=-1, keepdims=True)
        w = np.exp(logs)
        return w / w.sum(axis=-1, keepdims=True)

    return TiltedMoments(
        m1=lambda t: weights(t) @ values,
        m2=lambda t: weights(t) @ (values * values),
        mgf=lambda t: np.exp(np.multiply.outer(np.asarray(t), values)) @ probs,
    )


def _trunc_m(lam, t, lo, hi, order):
    t = np.asarray(t, dtype=np.float64)
    if t.ndim == 0:
        m1, m2 = truncated_moments(lam, float(t), lo, hi)
        return m1 if order == 1 else m2
    out = np.empty(t.shape)
    for i, ti in enumerate(t.ravel()):
        m1, m2 = truncated_moments(lam, float(ti), lo, hi)
        out.ravel()[i] = m1 if order == 1 else m2
    return out


@dataclass(frozen=True)
class DefaultClassification:
    """Per-sector verdicts plus the quantities that produced them."""

    o: int
    eta_o: float
    verdicts: list[str]
    L_minus: np.ndarray
    t_bar: float | None


def _refined_min(fn, grid, vals):
    """Minimum of fn over the grid span, polishing every local minimum."""
    best = float(vals.min())
    for i in range(len(grid)):
        left = vals[i - 1] if i > 0 else np.inf
        right = vals[i + 1] if i + 1 < len(grid) else np.inf
        if vals[i] <= left and vals[i] <= right:
            a = grid[max(i - 1, 0)]
            b = grid[min(i + 1, len(grid) - 1)]
            if b > a:
                res = minimize_scalar(fn, bounds=(a, b), method="bounded")
                best = min(best, float(res.fun))
    return best


def classify_defaults_single_shock(
    econ: Economy,
    L: LeontiefData,
    model: ShockModel,
    eta_o: float,
    signal: SignalModel | None = None,
    cell=None,
) -> DefaultClassification:
    """Classify each sector's default outcome at the realization eta_o.

    Sufficient conditions only: NEVER/NO_DEFAULT/DEFAULT verdicts are sound
    against the exact predicate tau_k < eps_k; UNDETERMINED carries no
    claim.  The band condition is scanned on a 256-point grid over
    [0, max(1, 2 max_k L-_k, L-_o + 1)] with bisection refinement of the
    exit boundary and polish of every local minimum for the outside check.
    """
    o = single_node_origin(model)
    tm = tilted_moments(model, signal, cell)
    Lo = L.L[:, o]
    n = econ.n

    L_minus = np.zeros(n)
    for k in range(n):
        supp = econ.A[:, k] > 0.0
        if supp.any():
            L_minus[k] = Lo[supp].max()

    t_hi = max(1.0, 2.0 * float(L_minus.max()), float(L_minus[o]) + 1.0)
    grid = np.linspace(0.0, t_hi, GRID_POINTS)
    dense = np.linspace(0.0, t_hi, GRID_POINTS * DENSE_FACTOR + 1)

    m1g = np.asarray(tm.m1(grid))
    sg = np.asarray(tm.sigma(grid))
    inside = (m1g - sg <= eta_o) & (eta_o <= m1g + sg)

    def inside_gap(t):
        # positive iff strictly inside the band
        return min(eta_o - (tm.m1(t) - tm.sigma(t)), (tm.m1(t) + tm.sigma(t)) - eta_o)

    if not inside[0]:
        t_bar = None
    elif inside.all():
        t_bar = float(t_hi)
    else:
        i = int(np.argmin(inside))  # first failure
        a, b = grid[i - 1], grid[i]
        for _ in range(200):
            if b - a <= BOUNDARY_TOL:
                break
            mid = 0.5 * (a + b)
            if inside_gap(mid) >= 0.0:
                a = mid
            else:
                b = mid
        t_bar = float(a)

    m1d = np.asarray(tm.m1(dense))
    sd = np.asarray(tm.sigma(dense))
    out_vals = np.abs(eta_o - m1d) - sd
    outside_all = (
        _refined_min(lambda t: abs(eta_o - tm.m1(t)) - tm.sigma(t), dense, out_vals)
        > 0.0
    )
    below_vals = (m1d - sd) - eta_o
    below_all = (
        _refined_min(lambda t: (tm.m1(t) - tm.sigma(t)) - eta_o, dense, below_vals)
        > 0.0
    )

    verdicts = []
    for k in range(n):
        if k == o:
            verdicts.append(_classify_origin(tm, econ, Lo, L_minus, o, eta_o))
            continue
        if Lo[k] <= ZERO_TOL:
            verdicts.append(NEVER)
            continue
        if _jensen_degenerate(econ, Lo, k):
            # tau_k == eps_k identically: profit is pinned at zero
            verdicts.append(NO_DEFAULT)
            continue
        if t_bar is not None and L_minus[k] <= t_bar + ZERO_TOL:
            verdicts.append(NO_DEFAULT)
        elif outside_all:
            verdicts.append(DEFAULT)
        else:
            verdicts.append(UNDETERMINED)

    # the origin uses below_all for its default side; patch if needed
    if verdicts[o] == UNDETERMINED and below_all and L.L[o, o] > 1.0 + ZERO_TOL:
        verdicts[o] = DEFAULT

    return DefaultClassification(
        o=o, eta_o=float(eta_o), verdicts=verdicts, L_minus=L_minus, t_bar=t_bar
    )


def _jensen_degenerate(econ: Economy, Lo: np.ndarray, k: int) -> bool:
    # all supplier weight of k sits on a single Leontief coefficient and
    # no labor share spreads it: tau_k and eps_k then coincide pathwise
    if econ.beta[k] > ZERO_TOL:
        return False
    pts = Lo[econ.A[:, k] > 0.0]
    return bool(pts.size and np.ptp(pts) <= ZERO_TOL)


def _classify_origin(tm, econ, Lo, L_minus, o, eta_o):
    if Lo[o] <= 1.0 + ZERO_TOL:
        # no cycle through o: exact threshold
        return DEFAULT if np.exp(eta_o) < float(tm.mgf(1.0)) else NO_DEFAULT
    hi = float(L_minus[o]) + 1.0
    dense = np.linspace(0.0, hi, GRID_POINTS * DENSE_FACTOR + 1)
    m1d = np.asarray(tm.m1(dense))
    sd = np.asarray(tm.sigma(dense))
    upper_ok = (
        _refined_min(lambda t: (tm.m1(t) + tm.sigma(t)) - eta_o, dense, (m1d + sd) - eta_o)
        >= 0.0
    )
    lower_ok = (
        _refined_min(lambda t: eta_o - tm.m1(t), dense, eta_o - m1d) >= 0.0
    )
    if upper_ok and lower_ok:
        return NO_DEFAULT
    return UNDETERMINED


def exact_default_predicate(tau: np.ndarray, eps: np.ndarray, k: int) -> bool:
    """Ground truth: sector k defaults iff tau_k < eps_k (strictly)."""
    return bool(tau[k] < eps[k])


def line_thresholds(alpha: float, lam: float, n: int = 4) -> np.ndarray:
    """Default thresholds x*_k on the chain shocked at sector 2 (index 1).

    Sector k defaults iff eta_2 < x*_k; the root sector never defaults
    (threshold -inf) and x*_2 = log(lam / (1 + lam)) in closed form.  For
    k >= 3 the threshold solves

        (a + lam) e^{x a} - (a + alpha lam) e^{x a / alpha} = lam (1 - alpha)

    with a = alpha^{k-2}, which has a unique negative root: the left side
    starts at the target with negative slope, has a single interior
    maximum and decays to zero.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    if lam <= 0.0:
        raise ShockModelError(f"lambda must be positive, got {lam}")
    if n < 2:
        raise InvalidAlpha("the chain needs at least two sectors")

    out = np.full(n, -np.inf)
    out[1] = np.log(lam / (1.0 + lam))
    target = lam * (1.0 - alpha)
    for k in range(3, n + 1):
        a = alpha ** (k - 2)
        b = alpha ** (k - 3)

        def f(x, a=a, b=b):
            return (a + lam) * np.exp(x * a) - (a + alpha * lam) * np.exp(x * b)

        # unique critical point, in closed form from the two-term derivative
        x_crit = np.log((b + lam) / (a + lam)) / (a - b)
        if not np.isfinite(x_crit) or x_crit >= 0.0 or f(x_crit) <= target:
            raise ConvergenceFailure(f"threshold bracket failed for sector {k}")
        x_lo = x_crit - 1.0
        for _ in range(400):
            if f(x_lo) < target:
                break
            x_lo = x_crit - 2.0 * (x_crit - x_lo)
        else:
            raise ConvergenceFailure(f"no sign change found for sector {k}")
        out[k - 1] = brentq(
            lambda x: f(x) - target, x_lo, x_crit, xtol=1e-13, maxiter=200
        )
    return out


def cycle_default_condition(
    alpha: float,
    lam: float,
    n: int,
    k: int,
    eta_o: float,
    o: int = 0,
    convention: str = "node-count",
) -> bool:
    """Default condition for node k of an n-cycle shocked at node o.

    ``node-count`` discounts walks by ``1 - alpha**n`` (the cycle's actual
    Leontief normalization, validated against the exact predicate);
    ``printed`` uses the ``1 - alpha**(n+1)`` variant with distance
    subscripts taken literally.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha}")
    d = (k - o) % n
    if convention == "node-count":
        denom = 1.0 - alpha**n
        ell = alpha**d / denom
        ell_pred = alpha ** ((d - 1) % n) / denom
    elif convention == "printed":
        denom = 1.0 - alpha ** (n + 1)
        ell = alpha**d / denom
        pred_idx = n if d == 0 else d - 1
        ell_pred = alpha**pred_idx / denom
    else:
        raise ValueError(f"unknown convention {convention!r}")
    lhs = (
        np.exp(ell * eta_o) * (ell + lam) / lam
        - (1.0 - alpha)
        - alpha * np.exp(ell_pred * eta_o) * (ell_pred + lam) / lam
    )
    return bool(lhs < 0.0)


def cycle_convention_report(
    alpha: float, lam: float, n: int, eta_grid, o: int = 0
) -> dict:
    """Match both cycle-condition conventions against the exact predicate."""
    denom = 1.0 - alpha**n
    dist = (np.arange(n) - o) % n
    Lo = alpha**dist / denom
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = alpha
    beta = np.full(n, 1.0 - alpha)

    matches = {"node-count": 0, "printed": 0}
    total = 0
    for eta in np.asarray(eta_grid, dtype=np.float64):
        tau = np.exp(Lo * eta) * (Lo + lam) / lam
        eps = tau @ A + beta
        for k in range(n):
            truth = bool(tau[k] < eps[k])
            total += 1
            for conv in matches:
                if cycle_default_condition(alpha, lam, n, k, eta, o, conv) == truth:
                    matches[conv] += 1
    return {
        "total": total,
        "matches": matches,
        "flagged": max(matches, key=matches.get),
    }
