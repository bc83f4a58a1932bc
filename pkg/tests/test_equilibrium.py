import numpy as np
import pytest

from helpers import (
    LAM,
    O,
    analytic_engine,
    exact_engine,
    line_model,
    random_economy,
    random_single_node_discrete,
    solve_line,
)
from rigidnet import (
    debt_profile,
    hulten_diagnostics,
    leontief,
    leverage_comparative_statics,
    maximal_equilibrium,
    realize,
    solve_zeta_all,
    welfare_bound_check,
)
from rigidnet.pipeline import full_information_solution, solve_cells
from rigidnet.scenarios import make_cycle, make_line
from rigidnet.shocks import ShockModel, SignalModel, tau_epsilon_law


def solve_discrete(econ, model, theta=None):
    if theta is not None:
        econ = econ.with_theta(theta)
    lt = leontief(econ)
    sol = solve_cells(econ, lt, model, SignalModel.none(), exact_engine())[0]
    return econ, lt, sol.profile, sol.equilibrium


# ---------------------------------------------------------------------------
# maximal equilibrium


def test_line_table_quantities():
    refs = {
        0.5: {
            "y": (0.54, 0.36, 0.34, 0.24),
            "l": (0.54, 0.14, 0.19, 0.12),
            "c": (0.33, 0.19, 0.22, 0.24),
        },
        1.0: {
            "y": (0.55, 0.31, 0.31, 0.23),
            "l": (0.55, 0.12, 0.20, 0.13),
            "c": (0.36, 0.17, 0.20, 0.23),
        },
    }
    for theta, ref in refs.items():
        _, _, prof, eq = solve_line(theta)
        assert np.allclose(eq.y0, ref["y"], atol=0.01)
        assert np.allclose(eq.l, ref["l"], atol=0.01)
        assert np.allclose(eq.c0, ref["c"], atol=0.01)
        assert eq.p_over_w[0] == pytest.approx(1.0, abs=1e-12)


def test_line_price_anchor_full_leverage():
    # independent anchor: p_2/w = e^{zeta_2} / E[e^{eta_2}] with the
    # closed-form zeta_2 = -log(1 - p + p lam/(1+lam)), p = (lam/(1+lam))^lam
    p = (LAM / (1.0 + LAM)) ** LAM
    zeta2 = -np.log(1.0 - p + LAM / (1.0 + LAM) * p)
    _, _, prof, eq = solve_line(1.0)
    assert eq.p_over_w[O] == pytest.approx(
        np.exp(zeta2) / (LAM / (1.0 + LAM)), abs=1e-6
    )


def test_cycle_table_quantities_full_leverage():
    econ = make_cycle(4, 0.6, theta=np.ones(4))
    lt = leontief(econ)
    sol = solve_cells(econ, lt, line_model(), SignalModel.none(), analytic_engine())[0]
    eq = sol.equilibrium
    assert np.allclose(eq.y0, (0.48, 0.37, 0.44, 0.49), atol=0.01)
    assert np.allclose(eq.l, (0.25, 0.18, 0.28, 0.28), atol=0.01)
    assert np.allclose(eq.c0, (0.28, 0.18, 0.21, 0.25), atol=0.01)


def test_clearing_identities(rng):
    for _ in range(15):
        econ = random_economy(rng)
        model, _ = random_single_node_discrete(rng, econ.n)
        econ, lt, prof, eq = solve_discrete(econ, model)
        assert abs(eq.l.sum() - 1.0) < 1e-10
        supplied = eq.z0.sum(axis=1) + eq.c0
        assert np.max(np.abs(eq.y0 - supplied)) < 1e-10
        # realized clearing at a random support point
        eta = model.points[rng.integers(len(model.probs))]
        real = realize(econ, lt, prof, eq, eta)
        supplied_eta = real.z.sum(axis=1) + real.c
        assert np.max(np.abs(real.y - supplied_eta)) < 1e-10


def test_wage_identity_and_relative_prices(rng):
    for _ in range(10):
        econ = random_economy(rng)
        model, _ = random_single_node_discrete(rng, econ.n)
        econ, lt, prof, eq = solve_discrete(econ, model)
        lhs, rhs = eq.wage_identity
        assert lhs == pytest.approx(rhs, abs=1e-10)
        bundle = np.prod(eq.p_over_w**econ.gamma)
        assert np.allclose(eq.p_rel, eq.p_over_w / bundle, atol=1e-10)


def test_full_information_reduction():
    econ = make_line(4, 0.6, theta=np.ones(4))
    lt = leontief(econ)
    eta = np.array([0.0, -1.2, 0.0, 0.0])
    prof, eq = full_information_solution(econ, lt, eta)
    assert np.allclose(eq.y0, lt.v0, atol=1e-12)
    assert np.allclose(eq.c0, econ.gamma, atol=1e-12)
    assert np.allclose(eq.z0, lt.v0[None, :] * econ.A, atol=1e-12)
    rho = lt.L @ eta
    assert np.allclose(eq.p_over_w, np.exp(-rho), atol=1e-12)

    real = realize(econ, lt, prof, eq, eta)
    assert np.allclose(real.profit, 0.0, atol=1e-12)
    assert np.allclose(real.bank_profit, 0.0, atol=1e-12)
    assert real.budget == pytest.approx(eq.w, abs=1e-12)
    assert real.welfare == pytest.approx(np.exp(lt.v0 @ eta), abs=1e-12)
    assert np.allclose(real.domar, lt.v0, atol=1e-12)


def test_realize_no_shock_no_debt():
    econ = make_line(4, 0.6)
    lt = leontief(econ)
    prof = debt_profile(econ, lt, np.zeros(4))
    eq = maximal_equilibrium(econ, lt, prof, np.ones(4))
    real = realize(econ, lt, prof, eq, np.zeros(4))
    assert np.allclose(real.profit, 0.0, atol=1e-14)
    assert real.welfare == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(real.domar, lt.v0, atol=1e-14)


def test_realize_line_negative_shock_defaults():
    econ, lt, prof, eq = solve_line(0.5)
    eta = np.array([0.0, -2.0, 0.0, 0.0])
    real = realize(econ, lt, prof, eq, eta)
    tau2 = (1.0 + LAM) / LAM * np.exp(-2.0)
    assert real.tau[O] == pytest.approx(tau2, rel=1e-12)
    assert real.epsilon[O] == pytest.approx(1.0, abs=1e-14)
    assert real.profit[O] == pytest.approx((tau2 - 1.0) * prof.v_zeta[O], rel=1e-12)
    assert real.profit[O] < 0.0  # sector 2 defaults
    # balance-sheet route to the same number
    assert real.profit[O] == pytest.approx(
        real.assets[O] - np.exp(prof.zeta[O]) * real.liabilities[O], abs=1e-12
    )


def test_balance_sheet_identity(rng):
    for _ in range(15):
        econ = random_economy(rng)
        model, _ = random_single_node_discrete(rng, econ.n)
        econ, lt, prof, eq = solve_discrete(econ, model)
        for eta in model.points[:4]:
            real = realize(econ, lt, prof, eq, eta)
            lhs = real.profit + real.bank_profit + real.default_cost
            assert np.max(np.abs(lhs - (real.assets - real.liabilities))) < 1e-12
            assert np.all(real.default_cost >= -1e-15)
            assert np.all(real.recovery >= -1e-15)
            # household budget exhausts spending exactly
            spend = float(eq.p_over_w @ real.c) * eq.w
            assert spend == pytest.approx(real.budget, abs=1e-10)


def test_zero_expected_profits_discrete(rng):
    for _ in range(15):
        econ = random_economy(rng)
        model, _ = random_single_node_discrete(rng, econ.n)
        econ, lt, prof, eq = solve_discrete(econ, model)
        e_pi = np.zeros(econ.n)
        e_bank = np.zeros(econ.n)
        for eta, p in zip(model.points, model.probs):
            real = realize(econ, lt, prof, eq, eta)
            e_pi += p * real.profit
            e_bank += p * real.bank_profit
        assert np.max(np.abs(e_pi)) < 1e-10
        assert np.max(np.abs(e_bank)) < 1e-10


def test_expected_budget_is_wage_over_psi(rng):
    econ = random_economy(rng)
    model, _ = random_single_node_discrete(rng, econ.n)
    econ, lt, prof, eq = solve_discrete(econ, model)
    e_budget = sum(
        p * realize(econ, lt, prof, eq, eta).budget
        for eta, p in zip(model.points, model.probs)
    )
    assert e_budget == pytest.approx(eq.w / prof.psi, abs=1e-10)


# ---------------------------------------------------------------------------
# Hulten diagnostics and the welfare bound


def test_hulten_holds_under_full_information():
    econ = make_line(4, 0.6, theta=np.ones(4))
    lt = leontief(econ)
    for eta2 in (-0.3, -2.5):
        eta = np.array([0.0, eta2, 0.0, 0.0])
        prof, eq = full_information_solution(econ, lt, eta)
        real = realize(econ, lt, prof, eq, eta)
        rep = hulten_diagnostics(real, prof, lt.v0)
        assert np.max(np.abs(rep.gap)) < 1e-12
        assert not rep.exceeds.any()


def test_hulten_holds_for_labor_proportional_shocks(rng):
    # eta = Y * beta with zero debt: tau is uniform across sectors, so the
    # Domar weights collapse onto the centralities draw by draw
    econ = random_economy(rng, zero_theta_frac=1.0)
    econ = econ.with_theta(np.zeros(econ.n))
    ys = -np.array([0.1, 0.4, 0.9, 1.7, 2.6, 0.05, 1.1, 3.0])
    pts = ys[:, None] * econ.beta[None, :]
    model = ShockModel.discrete(pts, np.full(8, 1 / 8))
    econ, lt, prof, eq = solve_discrete(econ, model)
    assert np.allclose(prof.zeta, 0.0, atol=1e-12)
    for eta in pts:
        real = realize(econ, lt, prof, eq, eta)
        assert np.max(np.abs(real.domar - lt.v0)) < 1e-10


def test_hulten_fails_with_debt_on_the_line():
    econ, lt, prof, eq = solve_line(0.5)
    real = realize(econ, lt, prof, eq, np.array([0.0, -2.0, 0.0, 0.0]))
    rep = hulten_diagnostics(real, prof, lt.v0)
    assert (rep.gap > 1e-6).any()
    assert rep.exceeds.any()
    # the flagged sectors are exactly those with welfare effect above weight
    assert np.array_equal(rep.exceeds, rep.gap > 0)


def test_welfare_bound():
    econ0, lt0, prof0, eq0 = solve_line(0.0)
    real0 = realize(econ0, lt0, prof0, eq0, np.array([0.0, -1.0, 0.0, 0.0]))
    _, _, slack0 = welfare_bound_check(real0, lt0.v0, prof0.zeta)
    assert abs(slack0) < 1e-12

    econ1, lt1, prof1, eq1 = solve_line(1.0)
    real1 = realize(econ1, lt1, prof1, eq1, np.array([0.0, -1.0, 0.0, 0.0]))
    u, bound, slack1 = welfare_bound_check(real1, lt1.v0, prof1.zeta)
    assert u <= bound
    assert slack1 > 1e-3


def test_welfare_bound_random(rng):
    for _ in range(20):
        econ = random_economy(rng)
        lt = leontief(econ)
        zeta = rng.exponential(scale=0.4, size=econ.n)
        prof = debt_profile(econ, lt, zeta)
        eq = maximal_equilibrium(econ, lt, prof, np.ones(econ.n))
        eta = -rng.exponential(scale=0.5, size=econ.n)
        real = realize(econ, lt, prof, eq, eta)
        _, _, slack = welfare_bound_check(real, lt.v0, zeta)
        assert slack >= -1e-12


# ---------------------------------------------------------------------------
# leverage comparative statics


def test_leverage_statics_on_the_line():
    econ = make_line(4, 0.6, theta=np.full(4, 0.5))
    lt = leontief(econ)
    rep = leverage_comparative_statics(
        econ, lt, analytic_engine(), line_model(), SignalModel.none(),
        O, np.linspace(0.0, 1.0, 6),
    )
    assert all(rep.claims.values()), rep.claims
    # the root is not a customer of sector 2: its total debt cost is flat
    assert np.max(np.abs(np.diff(rep.xi[:, 0]))) < 1e-12
    assert np.all(np.diff(rep.xi[:, 2]) >= -1e-12)
    assert np.all(np.diff(rep.xi[:, 3]) >= -1e-12)


def test_leverage_table_directions():
    # uniform leverage rising 0.5 -> 1: upstream labor gains, the shocked
    # sector sheds labor, and its price over wage climbs
    _, _, _, eq_half = solve_line(0.5)
    _, _, _, eq_full = solve_line(1.0)
    assert eq_full.l[0] > eq_half.l[0]
    assert eq_full.l[O] < eq_half.l[O]
    assert eq_full.p_over_w[O] > eq_half.p_over_w[O]
