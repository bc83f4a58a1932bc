"""Economy definition, validation, Leontief inverse and supplier relations.

An economy is a constant returns-to-scale Cobb-Douglas production network:
``A[j, k]`` is the importance of product ``j`` in sector ``k``'s technology,
``beta[k]`` the labor share, ``gamma[k]`` the consumer preference weight and
``theta[k]`` the fraction of liabilities financed with bank debt.  Column
sums of ``A`` plus ``beta`` must equal one, ``gamma`` must sum to one and
the spectral radius of ``A`` must be strictly below one.
"""

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import (
    ColumnSumViolation,
    DimensionMismatch,
    LeverageOutOfRange,
    NegativeEntry,
    PreferenceSumViolation,
    SingularSystem,
    SpectralRadiusNotSubunit,
)

COLUMN_SUM_TOL = 1e-12
PREFERENCE_SUM_TOL = 1e-12
BETA_MISMATCH_TOL = 1e-9
SPECTRAL_MARGIN = 1e-9
LEONTIEF_RESIDUAL_TOL = 1e-10
RELATION_TOL = 1e-12


@dataclass(frozen=True)
class Economy:
    """Validated production network with derived normalization constants."""

    n: int
    A: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    theta: np.ndarray
    sigma_const: np.ndarray
    chi_const: float
    label: str | None = None

    def with_theta(self, theta) -> "Economy":
        """Same economy with a different leverage vector."""
        theta = _as_vector(theta, self.n, "theta")
        _check_theta(theta)
        return Economy(
            self.n, self.A, self.beta, self.gamma, _freeze(theta),
            self.sigma_const, self.chi_const, self.label,
        )


@dataclass(frozen=True)
class LeontiefData:
    """Leontief inverse ``L = (I - A')^{-1}`` and Bonacich centrality ``v0``."""

    L: np.ndarray
    v0: np.ndarray


@dataclass(frozen=True)
class Relations:
    """Boolean matrices: ``is_supplier[j, k]`` means j supplies k."""

    is_supplier: np.ndarray
    is_customer: np.ndarray


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _as_vector(x, n: int, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (n,):
        raise DimensionMismatch(f"{name} must have shape ({n},), got {v.shape}")
    return v


def _check_theta(theta: np.ndarray) -> None:
    if np.any(theta < 0.0) or np.any(theta > 1.0):
        raise LeverageOutOfRange(f"theta entries must lie in [0, 1], got {theta}")


def _self_discount(v: np.ndarray) -> np.ndarray:
    # v ** (-v) entrywise with the convention 0 ** 0 = 1
    out = np.ones_like(v)
    pos = v > 0
    out[pos] = v[pos] ** (-v[pos])
    return out


def spectral_radius(A: np.ndarray, max_iter: int = 1000, tol: float = 1e-10) -> float:
    """Estimate the spectral radius of a nonnegative matrix.

    Power iteration runs on ``A + I`` (positive diagonal kills periodicity,
    e.g. on directed cycles) and the shift is subtracted at the end.  Falls
    back to a dense eigenvalue computation in the rare non-converged case.
    """
    n = A.shape[0]
    B = A + np.eye(n)
    x = np.full(n, 1.0 / n)
    lam = np.inf
    for _ in range(max_iter):
        y = B @ x
        lam_new = float(y.sum())
        x = y / lam_new
        if abs(lam_new - lam) < tol:
            return lam_new - 1.0
        lam = lam_new
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def economy_from_arrays(A, gamma, theta, beta=None, label=None) -> Economy:
    """Validate raw arrays and build an :class:`Economy`.

    ``beta`` may be omitted, in which case it is derived as one minus the
    column sums of ``A``; if supplied, it must agree with the derived value.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be a square matrix, got shape {A.shape}")
    n = A.shape[0]
    gamma = _as_vector(gamma, n, "gamma")
    theta = _as_vector(theta, n, "theta")

    if np.any(A < 0.0):
        raise NegativeEntry("A has negative entries")
    if np.any(gamma < 0.0):
        raise NegativeEntry("gamma has negative entries")
    _check_theta(theta)

    colsum = A.sum(axis=0)
    derived_beta = 1.0 - colsum
    if beta is None:
        beta = derived_beta
        if np.any(beta < -COLUMN_SUM_TOL):
            raise ColumnSumViolation(
                f"column sums of A exceed one (max {colsum.max():.6g})"
            )
        beta = np.maximum(beta, 0.0)
    else:
        beta = _as_vector(beta, n, "beta")
        if np.any(beta < 0.0):
            raise NegativeEntry("beta has negative entries")
        err = np.max(np.abs(colsum + beta - 1.0))
        if err > BETA_MISMATCH_TOL:
            raise ColumnSumViolation(
                f"A column sums plus beta deviate from one by {err:.3g}"
            )
    if np.max(np.abs(colsum + beta - 1.0)) > max(COLUMN_SUM_TOL, BETA_MISMATCH_TOL):
        raise ColumnSumViolation("constant returns-to-scale violated")

    if abs(gamma.sum() - 1.0) > PREFERENCE_SUM_TOL:
        raise PreferenceSumViolation(
            f"gamma sums to {gamma.sum():.17g}, expected 1"
        )

    rho = spectral_radius(A)
    if rho >= 1.0 - SPECTRAL_MARGIN:
        raise SpectralRadiusNotSubunit(
            f"spectral radius estimate {rho:.12g} is not strictly below one"
        )

    sigma = _self_discount(beta) * np.prod(_self_discount(A), axis=0)
    chi = float(np.prod(_self_discount(gamma)))
    return Economy(
        n=n,
        A=_freeze(A),
        beta=_freeze(beta),
        gamma=_freeze(gamma),
        theta=_freeze(theta),
        sigma_const=_freeze(sigma),
        chi_const=chi,
        label=label,
    )


def validate_economy(raw: Mapping) -> Economy:
    """Validate a raw economy description (parsed JSON document)."""
    try:
        A = raw["A"]
        gamma = raw["gamma"]
        theta = raw["theta"]
    except KeyError as exc:
        raise DimensionMismatch(f"economy description misses key {exc}") from None
    econ = economy_from_arrays(
        A, gamma, theta, beta=raw.get("beta"), label=raw.get("label")
    )
    if "n" in raw and int(raw["n"]) != econ.n:
        raise DimensionMismatch(
            f"declared n={raw['n']} but A is {econ.n}x{econ.n}"
        )
    return econ


def leontief(econ: Economy) -> LeontiefData:
    """Dense Leontief inverse and Bonacich centrality.

    ``L[k, j]`` aggregates walks from supplier j down to sector k, so that
    total shocks propagate as ``rho = L @ eta``; the centrality is the
    preference-weighted column sum ``v0[k] = sum_j gamma[j] * L[j, k]``.
    """
    n = econ.n
    M = np.eye(n) - econ.A.T
    try:
        L = np.linalg.solve(M, np.eye(n))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded upstream
        raise SingularSystem(str(exc)) from exc
    residual = np.max(np.abs(L @ M - np.eye(n)))
    if residual > LEONTIEF_RESIDUAL_TOL:
        raise SingularSystem(f"Leontief residual {residual:.3g} too large")
    v0 = L.T @ econ.gamma
    return LeontiefData(L=_freeze(L), v0=_freeze(v0))


def suppliers_customers(econ: Economy, lt: LeontiefData) -> Relations:
    """Supplier/customer relations read off the Leontief inverse.

    j supplies k when ``L[k, j] > 0`` (j != k) or ``L[k, k] > 1`` (j == k);
    customers are the transposed relation.
    """
    L = lt.L
    off = L.T > RELATION_TOL
    diag = np.diag(L) > 1.0 + RELATION_TOL
    is_supplier = off.copy()
    np.fill_diagonal(is_supplier, diag)
    is_customer = is_supplier.T.copy()
    return Relations(is_supplier=is_supplier, is_customer=is_customer)
