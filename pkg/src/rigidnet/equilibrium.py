"""Maximal equilibrium, shock-contingent realizations and diagnostics.

The wage is the numeraire (w = 1); prices are reported relative to it and
the product identity tying the wage to expected total shocks is exposed as
a consistency pair rather than solved.  All quantities follow from the
debt profile in closed form: production ``v e^{-xi}``, labor
``v beta e^{-zeta}``, consumption ``gamma e^{-xi} / psi`` and prices
``e^{xi} / E[e^rho | signal]``.
"""

from dataclasses import dataclass

import numpy as np

from .debt import DebtProfile, debt_profile, solve_zeta, tau_epsilon_law
from .economy import Economy, LeontiefData, Relations, suppliers_customers
from .errors import DimensionMismatch, InconsistentProfile

STATICS_SLACK = 1e-9


@dataclass(frozen=True)
class Equilibrium:
    """Signal-measurable equilibrium quantities (wage as numeraire)."""

    y0: np.ndarray
    z0: np.ndarray
    l: np.ndarray
    c0: np.ndarray
    p_over_w: np.ndarray
    p_rel: np.ndarray
    r: np.ndarray
    w: float
    expected_exp_rho: np.ndarray
    wage_identity: tuple[float, float]


@dataclass(frozen=True)
class Realization:
    """Shock-contingent outcome at a fixed equilibrium."""

    eta: np.ndarray
    rho: np.ndarray
    tau: np.ndarray
    epsilon: np.ndarray
    y: np.ndarray
    z: np.ndarray
    c: np.ndarray
    profit: np.ndarray
    assets: np.ndarray
    liabilities: np.ndarray
    default_cost: np.ndarray
    recovery: np.ndarray
    bank_profit: np.ndarray
    budget: float
    welfare: float
    domar: np.ndarray
    domar_defined: bool
    amplification: np.ndarray
    psi: float
    v_zeta: np.ndarray


def maximal_equilibrium(
    econ: Economy,
    L: LeontiefData,
    profile: DebtProfile,
    expected_exp_rho,
) -> Equilibrium:
    """Evaluate the unique rigid equilibrium given a solved debt profile."""
    e_rho = np.asarray(expected_exp_rho, dtype=np.float64)
    if e_rho.shape != (econ.n,):
        raise DimensionMismatch(
            f"expected_exp_rho must have shape ({econ.n},), got {e_rho.shape}"
        )
    if profile.zeta.shape != (econ.n,) or np.any(profile.zeta < -1e-15):
        raise InconsistentProfile("profile does not match the economy")

    zeta, xi, psi, v = profile.zeta, profile.xi, profile.psi, profile.v_zeta
    y0 = v * np.exp(-xi)
    z0 = np.exp(-xi)[:, None] * econ.A * (v * np.exp(-zeta))[None, :]
    labor = v * econ.beta * np.exp(-zeta)
    c0 = econ.gamma * np.exp(-xi) / psi
    p_over_w = np.exp(xi) / e_rho

    # price of good k over the consumption-bundle price
    all_exp = float(np.prod(e_rho**econ.gamma))
    p_rel = all_exp / e_rho**econ.gamma * np.exp(L.L @ zeta - L.v0 @ zeta)

    w = 1.0
    rhs = float(
        np.prod((p_over_w * w) ** econ.gamma)
        * np.prod(e_rho**econ.gamma)
        * np.exp(-(L.v0 @ zeta))
    )
    return Equilibrium(
        y0=y0,
        z0=z0,
        l=labor,
        c0=c0,
        p_over_w=p_over_w,
        p_rel=p_rel,
        r=np.asarray(profile.r),
        w=w,
        expected_exp_rho=e_rho,
        wage_identity=(w, rhs),
    )


def realize(
    econ: Economy,
    L: LeontiefData,
    profile: DebtProfile,
    equil: Equilibrium,
    eta,
) -> Realization:
    """Actual quantities, balance sheet and welfare at a realization.

    Proportional rationing scales each maximal quantity by exp of the
    relevant total shock; the balance sheet uses the conditional expected
    revenue ``s_k = w v_k`` so that assets are ``s tau`` and compounded
    liabilities ``e^zeta * (eps s e^{-zeta}) = eps s``.
    """
    eta = np.asarray(eta, dtype=np.float64)
    if eta.shape != (econ.n,):
        raise DimensionMismatch(f"eta must have shape ({econ.n},), got {eta.shape}")
    rho = L.L @ eta
    tau = np.exp(rho) / equil.expected_exp_rho
    eps = tau @ econ.A + econ.beta

    y = np.exp(rho) * equil.y0
    z = np.exp(rho)[:, None] * equil.z0
    c = np.exp(rho) * equil.c0

    zeta = profile.zeta
    s = equil.w * profile.v_zeta
    assets = s * tau
    liabilities = eps * s * np.exp(-zeta)
    profit = (tau - eps) * s
    borrow_factor = econ.theta + np.expm1(zeta)  # (1 + r) * theta
    default_cost = np.clip(
        np.exp(zeta) * liabilities - assets, 0.0, borrow_factor * liabilities
    )
    recovery = borrow_factor * liabilities - default_cost
    bank_profit = np.clip(
        assets - liabilities,
        -econ.theta * liabilities,
        np.expm1(zeta) * liabilities,
    )

    budget = equil.w / profile.psi * float(econ.gamma @ tau)
    welfare = float(np.exp(L.v0 @ (eta - zeta)) / profile.psi)
    gamma_tau = float(econ.gamma @ tau)
    domar_defined = gamma_tau > 1e-300
    domar = (
        profile.psi * profile.v_zeta * tau / gamma_tau
        if domar_defined
        else np.full(econ.n, np.nan)
    )
    return Realization(
        eta=eta,
        rho=rho,
        tau=tau,
        epsilon=eps,
        y=y,
        z=z,
        c=c,
        profit=profit,
        assets=assets,
        liabilities=liabilities,
        default_cost=default_cost,
        recovery=recovery,
        bank_profit=bank_profit,
        budget=budget,
        welfare=welfare,
        domar=domar,
        domar_defined=domar_defined,
        amplification=equil.w * profile.v_zeta > 1.0,
        psi=profile.psi,
        v_zeta=np.asarray(profile.v_zeta),
    )


@dataclass(frozen=True)
class HultenReport:
    """Marginal welfare effects vs Domar weights, sector by sector."""

    marginal_welfare: np.ndarray  # d log U / d eta_k = v0_k
    domar: np.ndarray
    gap: np.ndarray
    exceeds: np.ndarray  # where the welfare effect strictly exceeds the weight


def hulten_diagnostics(
    realization: Realization, profile: DebtProfile, v0
) -> HultenReport:
    """Sectorwise comparison of Bonacich centrality and Domar weights.

    The welfare effect exceeds the Domar weight exactly when
    ``tau_k * psi * v_zeta_k < v0_k * sum_j gamma_j tau_j``; with the wage
    as numeraire the preference-weighted shock sum is ``budget * psi``.
    """
    v0 = np.asarray(v0, dtype=np.float64)
    gamma_tau = realization.budget * realization.psi
    exceeds = realization.tau * profile.psi * profile.v_zeta < v0 * gamma_tau
    return HultenReport(
        marginal_welfare=v0,
        domar=realization.domar,
        gap=v0 - realization.domar,
        exceeds=exceeds,
    )


def welfare_bound_check(realization: Realization, v0, zeta):
    """First-best welfare bound: U <= exp(sum v0 eta), slack = log psi + v0.zeta."""
    v0 = np.asarray(v0, dtype=np.float64)
    rhs = float(np.exp(v0 @ realization.eta))
    slack = float(v0 @ realization.eta - np.log(realization.welfare))
    return realization.welfare, rhs, slack


@dataclass(frozen=True)
class StaticsReport:
    """Quantities along a single-sector leverage sweep plus claim verdicts."""

    o: int
    theta_grid: np.ndarray
    zeta_o: np.ndarray
    xi: np.ndarray
    labor: np.ndarray
    c0: np.ndarray
    p_over_w: np.ndarray
    p_rel: np.ndarray
    claims: dict[str, bool]


def leverage_comparative_statics(
    econ: Economy,
    L: LeontiefData,
    engine,
    model,
    signal,
    o: int,
    theta_grid,
) -> StaticsReport:
    """Sweep sector o's leverage and check the directional claims.

    Verified along consecutive grid points: the total cost of debt rises
    only on o and its customers; labor does not fall outside o and its
    suppliers while someone among them does not gain; consumption does not
    fall outside o and its customers; prices over wage rise on o and its
    customers, and relative prices move with the sign of ``L[k, o] - v0[o]``.
    """
    theta_grid = np.asarray(theta_grid, dtype=np.float64)
    rel = suppliers_customers(econ, L)
    law = tau_epsilon_law(econ, L, model, signal, engine)
    e_rho = _expected_exp_rho_for(econ, L, engine, model, signal)

    zeta_base = np.array(
        [solve_zeta(law, k, econ.theta[k]) for k in range(econ.n)]
    )
    rows = {"zeta_o": [], "xi": [], "l": [], "c0": [], "p": [], "p_rel": []}
    for th in theta_grid:
        zeta = zeta_base.copy()
        zeta[o] = solve_zeta(law, o, th)
        theta_vec = np.array(econ.theta)
        theta_vec[o] = th
        prof = debt_profile(econ.with_theta(theta_vec), L, zeta)
        eq = maximal_equilibrium(econ.with_theta(theta_vec), L, prof, e_rho)
        rows["zeta_o"].append(zeta[o])
        rows["xi"].append(prof.xi)
        rows["l"].append(eq.l)
        rows["c0"].append(eq.c0)
        rows["p"].append(eq.p_over_w)
        rows["p_rel"].append(eq.p_rel)

    zeta_o = np.array(rows["zeta_o"])
    xi = np.vstack(rows["xi"])
    labor = np.vstack(rows["l"])
    c0 = np.vstack(rows["c0"])
    p = np.vstack(rows["p"])
    p_rel = np.vstack(rows["p_rel"])

    cust_o = rel.is_customer[:, o].copy()
    cust_o[o] = True
    supp_o = rel.is_supplier[:, o].copy()
    supp_o[o] = True

    dxi = np.diff(xi, axis=0)
    dl = np.diff(labor, axis=0)
    dc = np.diff(c0, axis=0)
    dp = np.diff(p, axis=0)
    dp_rel = np.diff(p_rel, axis=0)
    tol = STATICS_SLACK

    claims = {
        "xi_nondecreasing_on_o_and_customers": bool(
            np.all(dxi[:, cust_o] >= -tol)
        ),
        "xi_constant_elsewhere": bool(np.all(np.abs(dxi[:, ~cust_o]) <= tol)),
        "labor_nondecreasing_outside_o_and_suppliers": bool(
            np.all(dl[:, ~supp_o] >= -tol)
        ),
        "labor_some_nonincreasing_among_o_and_suppliers": bool(
            np.all(np.any(dl[:, supp_o] <= tol, axis=1))
        ),
        "consumption_nondecreasing_outside_o_and_customers": bool(
            np.all(dc[:, ~cust_o] >= -tol)
        ),
        "price_nondecreasing_on_o_and_customers": bool(
            np.all(dp[:, cust_o] >= -tol)
        ),
        "relative_price_direction_by_leontief_vs_centrality": bool(
            np.all(dp_rel[:, L.L[:, o] >= L.v0[o]] >= -tol)
            and np.all(dp_rel[:, L.L[:, o] <= L.v0[o]] <= tol)
        ),
        "zeta_o_nondecreasing": bool(np.all(np.diff(zeta_o) >= -tol)),
    }
    return StaticsReport(
        o=o,
        theta_grid=theta_grid,
        zeta_o=zeta_o,
        xi=xi,
        labor=labor,
        c0=c0,
        p_over_w=p,
        p_rel=p_rel,
        claims=claims,
    )


def _expected_exp_rho_for(econ, L, engine, model, signal):
    from .shocks import expected_exp_rho

    return expected_exp_rho(L, model, signal, engine, None)
