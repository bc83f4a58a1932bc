"""Endogenous cost of debt.

The bank zero-expected-profit condition for sector k reads

    E[ clamp(x * tau_k, (1-theta_k) * eps_k, x * eps_k) | signal ] = 1

in the compounding variable ``x = 1 + r_k theta_k``.  The left side is
continuous and strictly increasing in x on [1, inf), nonpositive at x = 1
and crosses one before ``x = 1 / E[min(tau_k, eps_k)]``, so bisection on
that bracket converges unconditionally.  ``zeta_k = log x*`` is the
primitive cost of debt; Leontief aggregation gives the total cost ``xi``,
the discounted Leontief inverse, its normalization ``psi`` and the
discounted centrality.
"""

from dataclasses import dataclass

import numpy as np

from .economy import Economy, LeontiefData, _freeze, leontief
from .errors import BracketFailure, DimensionMismatch, SingularSystem
from .shocks import (
    ExpectationEngine,
    ShockModel,
    SignalModel,
    tau_epsilon_law,
)

X_TOL = 1e-12
MAX_BISECT = 200
BRACKET_SLACK = 1e-9
PROFILE_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class DebtProfile:
    """Per-sector debt quantities derived from the primitive costs zeta."""

    zeta: np.ndarray
    xi: np.ndarray
    L_zeta: np.ndarray
    psi: float
    v_zeta: np.ndarray
    r: np.ndarray


def solve_zeta(law, k: int, theta_k: float) -> float:
    """Primitive cost of debt for one sector.

    ``law`` supplies the conditional clamp expectations of (tau_k, eps_k).
    theta_k = 0 short-circuits to zero, the limit solution of the
    zero-profit condition as leverage vanishes.
    """
    if theta_k == 0.0:
        return 0.0
    lo_factor = 1.0 - theta_k

    def f(x: float) -> float:
        return law.expect_clamp(k, x, lo_factor) - 1.0

    if f(1.0) >= 0.0:
        return 0.0
    emin = law.expect_min(k)
    if not np.isfinite(emin) or emin <= 0.0:
        raise BracketFailure(f"E[min(tau, eps)] = {emin} for sector {k}")
    x_hi = (1.0 / emin) * (1.0 + BRACKET_SLACK)
    if f(x_hi) < 0.0:
        raise BracketFailure(
            f"zero-profit equation still negative at bracket end x={x_hi:.12g}"
        )
    x_lo = 1.0
    for _ in range(MAX_BISECT):
        if x_hi - x_lo <= X_TOL:
            break
        mid = 0.5 * (x_lo + x_hi)
        if f(mid) < 0.0:
            x_lo = mid
        else:
            x_hi = mid
    return float(np.log(0.5 * (x_lo + x_hi)))


def solve_zeta_all(
    econ: Economy,
    L: LeontiefData,
    engine: ExpectationEngine,
    model: ShockModel,
    signal: SignalModel,
    cell=None,
) -> np.ndarray:
    """Solve the zero-profit condition sector by sector."""
    law = tau_epsilon_law(econ, L, model, signal, engine, cell)
    return np.array([solve_zeta(law, k, econ.theta[k]) for k in range(econ.n)])


def debt_profile(econ: Economy, L: LeontiefData, zeta) -> DebtProfile:
    """Assemble total costs, discounted Leontief objects and interest rates.

    ``xi`` is obtained by solving ``(I - A') xi = zeta`` rather than by an
    explicit product with ``L``; the two agree at these problem sizes.
    """
    zeta = np.asarray(zeta, dtype=np.float64)
    n = econ.n
    if L.L.shape != (n, n) or zeta.shape != (n,):
        raise DimensionMismatch(
            f"inconsistent shapes: L {L.L.shape}, zeta {zeta.shape}, n={n}"
        )
    eye = np.eye(n)
    M = eye - np.exp(-zeta)[:, None] * econ.A.T
    try:
        L_zeta = np.linalg.solve(M, eye)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise SingularSystem(str(exc)) from exc
    residual = np.max(np.abs(L_zeta @ M - eye))
    if residual > PROFILE_RESIDUAL_TOL:
        raise SingularSystem(f"discounted Leontief residual {residual:.3g}")

    xi = np.linalg.solve(eye - econ.A.T, zeta)
    psi = float(econ.gamma @ L_zeta @ (econ.beta * np.exp(-zeta)))
    v_zeta = L_zeta.T @ econ.gamma / psi
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(econ.theta > 0.0, np.expm1(zeta) / econ.theta, 0.0)
    return DebtProfile(
        zeta=_freeze(zeta),
        xi=_freeze(xi),
        L_zeta=_freeze(L_zeta),
        psi=psi,
        v_zeta=_freeze(v_zeta),
        r=_freeze(r),
    )


@dataclass(frozen=True)
class WalkExpansion:
    """Matrix-inverse values vs truncated walk sums, with tail bounds.

    A walk from j down to k of length l carries weight
    ``prod A[w_h, w_{h-1}]`` and discount ``prod exp(-zeta[w_h])`` over its
    nodes; summing over all walks reproduces ``L_zeta[j, k] exp(-zeta_k)``.
    Tail bounds come from the undiscounted series, whose total is known
    exactly from the Leontief inverse.
    """

    psi_exact: float
    psi_truncated: float
    psi_tail_bound: float
    L_zeta_exact: np.ndarray
    L_zeta_truncated: np.ndarray
    L_tail_bound: np.ndarray
    v_zeta_exact: np.ndarray
    v_zeta_truncated: np.ndarray
    v_tail_bound: np.ndarray


def walk_expansion_check(econ: Economy, zeta, max_length: int) -> WalkExpansion:
    """Compare discounted Leontief objects against truncated walk sums."""
    zeta = np.asarray(zeta, dtype=np.float64)
    n = econ.n
    lt = leontief(econ)
    L = np.asarray(lt.L)
    profile = debt_profile(econ, lt, zeta)

    M = np.exp(-zeta)[:, None] * econ.A.T
    U = econ.A.T  # undiscounted majorant of M
    d = econ.beta * np.exp(-zeta)

    L_trunc = np.eye(n)
    U_sum = np.eye(n)
    P = np.eye(n)
    Q = np.eye(n)
    for _ in range(max_length):
        P = P @ M
        Q = Q @ U
        L_trunc = L_trunc + P
        U_sum = U_sum + Q

    psi_trunc = float(econ.gamma @ L_trunc @ d)
    psi_tail = float(1.0 - econ.gamma @ U_sum @ econ.beta)
    L_tail = L - U_sum
    num_trunc = L_trunc.T @ econ.gamma
    v_trunc = num_trunc / psi_trunc
    num_tail = L_tail.T @ econ.gamma
    v_tail = (num_tail + v_trunc * psi_tail) / profile.psi

    return WalkExpansion(
        psi_exact=profile.psi,
        psi_truncated=psi_trunc,
        psi_tail_bound=psi_tail,
        L_zeta_exact=np.asarray(profile.L_zeta),
        L_zeta_truncated=L_trunc,
        L_tail_bound=L_tail,
        v_zeta_exact=np.asarray(profile.v_zeta),
        v_zeta_truncated=v_trunc,
        v_tail_bound=v_tail,
    )
