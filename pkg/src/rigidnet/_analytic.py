"""Closed-form expectations over a single truncated-exponential shock.

Everything the debt solver needs from the exponential shock model reduces
to integrals of *exponential polynomials* ``g(u) = sum_i c_i exp(r_i u)``
(all ``r_i >= 0``) against the density ``lam * exp(lam u)`` on an interval
of the nonpositive half line.  Clamped integrands are handled by isolating
the clamp crossovers exactly and integrating each piece in closed form.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

# Tail mass below hi - TAIL_MASS_LOG / lam underflows to zero in doubles;
# roots further out cannot move any integral at double precision.
TAIL_MASS_LOG = 800.0


@dataclass(frozen=True)
class ExpPoly:
    """g(u) = sum_i coefs[i] * exp(rates[i] * u), rates >= 0, u <= 0."""

    coefs: np.ndarray
    rates: np.ndarray

    def __call__(self, u):
        u = np.asarray(u, dtype=np.float64)
        return np.exp(np.multiply.outer(u, self.rates)) @ self.coefs

    def scaled(self, factor: float) -> "ExpPoly":
        return ExpPoly(self.coefs * factor, self.rates)


def exp_poly(terms) -> ExpPoly:
    """Build an ExpPoly from (coef, rate) pairs, merging equal rates."""
    merged: dict[float, float] = {}
    for coef, rate in terms:
        if coef == 0.0:
            continue
        merged[float(rate)] = merged.get(float(rate), 0.0) + float(coef)
    merged = {r: c for r, c in merged.items() if c != 0.0}
    if not merged:
        return ExpPoly(np.zeros(0), np.zeros(0))
    rates = np.array(sorted(merged))
    coefs = np.array([merged[r] for r in rates])
    return ExpPoly(coefs, rates)


def poly_diff(p: ExpPoly, q: ExpPoly) -> ExpPoly:
    return exp_poly(
        list(zip(p.coefs, p.rates)) + list(zip(-q.coefs, q.rates))
    )


def exp_weighted_integral(poly: ExpPoly, lam: float, lo: float, hi: float) -> float:
    """Integral of poly(u) * lam * exp(lam*u) du over [lo, hi]; lo may be -inf."""
    if poly.coefs.size == 0:
        return 0.0
    s = poly.rates + lam
    upper = np.exp(s * hi)
    lower = np.exp(s * lo) if np.isfinite(lo) else np.zeros_like(s)
    return float(np.sum(poly.coefs * lam / s * (upper - lower)))


def interval_mass(lam: float, lo: float, hi: float) -> float:
    """P(lo < eta <= hi) for eta = -Exp(lam), hi <= 0."""
    upper = np.exp(lam * hi)
    lower = np.exp(lam * lo) if np.isfinite(lo) else 0.0
    return float(upper - lower)


def truncated_mgf(lam: float, t, lo: float, hi: float):
    """E[exp(t * eta) | lo < eta <= hi] for eta = -Exp(lam), t >= 0."""
    t = np.asarray(t, dtype=np.float64)
    s = lam + t
    upper = np.exp(s * hi)
    lower = np.exp(s * lo) if np.isfinite(lo) else np.zeros_like(s)
    return lam / s * (upper - lower) / interval_mass(lam, lo, hi)


def truncated_moments(lam: float, t: float, lo: float, hi: float):
    """First and second moment of the exponentially tilted shock on a cell.

    The tilted density is proportional to exp((t+lam) * u) on [lo, hi]; both
    moments have elementary antiderivatives.
    """
    s = lam + t

    def anti(u, k):
        # integral of u^k e^{s u}, evaluated; u may be -inf (limit 0)
        if not np.isfinite(u):
            return 0.0
        e = np.exp(s * u)
        if k == 0:
            return e / s
        if k == 1:
            return e * (u / s - 1.0 / s**2)
        return e * (u * u / s - 2.0 * u / s**2 + 2.0 / s**3)

    z = anti(hi, 0) - anti(lo, 0)
    m1 = (anti(hi, 1) - anti(lo, 1)) / z
    m2 = (anti(hi, 2) - anti(lo, 2)) / z
    return m1, m2


def _two_term_root(c0: float, c1: float, r1: float) -> float | None:
    # c0 + c1 * exp(r1 * u) = 0  (r1 > 0)
    ratio = -c0 / c1
    if ratio <= 0.0:
        return None
    return np.log(ratio) / r1


def exp_poly_roots(poly: ExpPoly, lo: float, hi: float) -> list[float]:
    """All roots of an exponential polynomial on the finite interval [lo, hi].

    Recursive differentiation: after dividing out the smallest rate the
    derivative loses one term, so critical points come from a smaller
    instance; the polynomial is strictly monotone between them and brentq
    nails each bracketed root.  An m-term polynomial has < m real roots.
    """
    mask = poly.coefs != 0.0
    coefs = poly.coefs[mask]
    rates = poly.rates[mask]
    if coefs.size <= 1 or lo >= hi:
        return []
    rates = rates - rates[0]  # divide by exp(r_min u) > 0; roots unchanged
    shifted = ExpPoly(coefs, rates)

    if coefs.size == 2:
        root = _two_term_root(coefs[0], coefs[1], rates[1])
        return [root] if root is not None and lo <= root <= hi else []

    deriv = exp_poly(
        (c * r, r) for c, r in zip(shifted.coefs, shifted.rates) if r > 0.0
    )
    crit = exp_poly_roots(deriv, lo, hi)
    edges = [lo] + sorted(c for c in crit if lo < c < hi) + [hi]

    roots = []
    for a, b in zip(edges[:-1], edges[1:]):
        fa, fb = shifted(a), shifted(b)
        if fa == 0.0:
            roots.append(float(a))
        if fa * fb < 0.0:
            roots.append(float(brentq(shifted, a, b, xtol=1e-14, maxiter=200)))
    if shifted(hi) == 0.0:
        roots.append(float(hi))
    return sorted(set(roots))


def clamped_expectation(
    mid: ExpPoly,
    lo_bound: ExpPoly,
    hi_bound: ExpPoly,
    lam: float,
    cell_lo: float,
    cell_hi: float,
) -> float:
    """E[ clamp(mid(eta), lo_bound(eta), hi_bound(eta)) | eta in cell ].

    Requires lo_bound <= hi_bound on the cell, which holds for the debt
    equation where lo_bound = (1-theta)/x * hi_bound with x >= 1.
    """
    search_lo = cell_hi - TAIL_MASS_LOG / lam
    if np.isfinite(cell_lo):
        search_lo = max(search_lo, cell_lo)
    cuts = set()
    cuts.update(exp_poly_roots(poly_diff(mid, lo_bound), search_lo, cell_hi))
    cuts.update(exp_poly_roots(poly_diff(mid, hi_bound), search_lo, cell_hi))
    edges = [cell_lo] + sorted(c for c in cuts if cell_lo < c < cell_hi) + [cell_hi]

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        u = 0.5 * (a + b) if np.isfinite(a) else b - 1.0
        m, l, h = mid(u), lo_bound(u), hi_bound(u)
        if m < l:
            branch = lo_bound
        elif m > h:
            branch = hi_bound
        else:
            branch = mid
        total += exp_weighted_integral(branch, lam, a, b)
    return total / interval_mass(lam, cell_lo, cell_hi)
