import numpy as np
import pytest
from scipy.integrate import quad

from helpers import (
    LAM,
    O,
    analytic_engine,
    exact_engine,
    line_model,
    mc_engine,
    random_economy,
    random_single_node_discrete,
)
from rigidnet import (
    ExpOfLinear,
    ShockModel,
    SignalModel,
    conditional_expectation,
    expected_exp_rho,
    leontief,
    normalized_shocks,
    total_shock,
)
from rigidnet.errors import (
    DimensionMismatch,
    EmptyCell,
    ShockModelError,
    UnsupportedAnalytic,
)
from rigidnet.scenarios import make_cycle, make_line
from rigidnet.shocks import check_partition, tau_epsilon_law


def exp_shock_oracle(f, lam=LAM, lo=-np.inf, hi=0.0):
    """Adaptive quadrature of E[f(eta_o) | lo < eta_o <= hi], -eta_o ~ Exp(lam)."""
    a = 0.0 if hi >= 0.0 else -hi
    b = np.inf if np.isinf(lo) else -lo
    num, _ = quad(lambda s: f(-s) * lam * np.exp(-lam * s), a, b, epsabs=1e-13)
    den, _ = quad(lambda s: lam * np.exp(-lam * s), a, b, epsabs=1e-13)
    return num / den


# ---------------------------------------------------------------------------
# model validation


def test_discrete_model_validation():
    with pytest.raises(ShockModelError):
        ShockModel.discrete([[0.5, 0.0]], [1.0])  # positive support point
    with pytest.raises(ShockModelError):
        ShockModel.discrete([[0.0, 0.0], [-1.0, 0.0]], [0.6, 0.6])
    with pytest.raises(ShockModelError):
        ShockModel.discrete([[-1.0, 0.0]], [1.0])  # deterministic
    m = ShockModel.discrete([[0.0, 0.0], [-1.0, 0.0]], [0.5, 0.5])
    assert m.kind == "discrete"


def test_degenerate_model_warns():
    with pytest.warns(UserWarning):
        ShockModel.degenerate([0.0, -1.0])
    with pytest.raises(ShockModelError):
        ShockModel.degenerate([0.1, 0.0])


# ---------------------------------------------------------------------------
# total shocks


def test_total_shock_on_the_line():
    lt = leontief(make_line(4, 0.6))
    eta2 = -1.3
    rho = total_shock(lt, [0.0, eta2, 0.0, 0.0])
    assert np.allclose(rho, eta2 * np.array([0.0, 1.0, 0.6, 0.36]), atol=1e-14)
    assert np.array_equal(total_shock(lt, np.zeros(4)), np.zeros(4))
    with pytest.raises(DimensionMismatch):
        total_shock(lt, np.zeros(3))


def test_total_shock_on_the_cycle():
    lt = leontief(make_cycle(4, 0.6))
    eta = np.zeros(4)
    eta[O] = -2.0
    rho = total_shock(lt, eta)
    denom = 1.0 - 0.6**4
    for k in range(4):
        assert rho[k] == pytest.approx(-2.0 * 0.6 ** ((k - O) % 4) / denom, abs=1e-14)


# ---------------------------------------------------------------------------
# conditional expectations


def test_analytic_expectation_matches_oracle_and_closed_form():
    model = line_model()
    signal = SignalModel.none()
    w = np.zeros(4)
    w[O] = 1.0
    got = conditional_expectation(analytic_engine(), model, signal, ExpOfLinear(w), n=4)
    oracle = exp_shock_oracle(lambda u: np.exp(u))
    assert got.value == pytest.approx(LAM / (LAM + 1.0), abs=1e-12)
    assert got.value == pytest.approx(oracle, abs=1e-10)

    w06 = np.zeros(4)
    w06[O] = 0.6
    got06 = conditional_expectation(
        analytic_engine(), model, signal, ExpOfLinear(w06), n=4
    )
    assert got06.value == pytest.approx(0.25 / 0.85, abs=1e-12)
    assert got06.value == pytest.approx(
        exp_shock_oracle(lambda u: np.exp(0.6 * u)), abs=1e-10
    )


def test_analytic_expectation_grid_against_quadrature():
    model = line_model()
    signal = SignalModel.none()
    for t in np.linspace(0.0, 10.0, 21):
        w = np.zeros(4)
        w[O] = t
        got = conditional_expectation(
            analytic_engine(), model, signal, ExpOfLinear(w), n=4
        )
        assert got.value == pytest.approx(
            exp_shock_oracle(lambda u: np.exp(t * u)), abs=1e-10
        )


def test_full_signal_expectation_is_pointwise():
    model = line_model()
    eta = np.array([0.0, -0.7, 0.0, 0.0])
    got = conditional_expectation(
        analytic_engine(), model, SignalModel.full(), lambda e: np.exp(e[:, O]),
        cell=eta, n=4,
    )
    assert got.value == pytest.approx(np.exp(-0.7), abs=1e-15)
    assert got.stderr == 0.0


def test_discrete_two_point_expectation():
    model = ShockModel.discrete([[0.0, 0.0], [-1.0, 0.0]], [0.5, 0.5])
    got = conditional_expectation(
        exact_engine(), model, SignalModel.none(), lambda e: np.exp(e[:, 0])
    )
    assert got.value == pytest.approx(0.5 * (1.0 + np.exp(-1.0)), abs=1e-15)


def test_analytic_backend_rejects_general_callables():
    with pytest.raises(UnsupportedAnalytic):
        conditional_expectation(
            analytic_engine(), line_model(), SignalModel.none(),
            lambda e: np.exp(e[:, O]), n=4,
        )


def test_mc_expectation_matches_oracle_within_stderr():
    model = line_model()
    got = conditional_expectation(
        mc_engine(num_draws=400_000, seed=5), model, SignalModel.none(),
        lambda e: np.exp(e[:, O]), n=4,
    )
    assert abs(got.value - 0.2) < 4.0 * got.stderr
    again = conditional_expectation(
        mc_engine(num_draws=400_000, seed=5), model, SignalModel.none(),
        lambda e: np.exp(e[:, O]), n=4,
    )
    assert got.value == again.value  # bit identical for equal seeds


def test_mc_determinism_across_worker_counts(monkeypatch):
    model = line_model()
    lt = leontief(make_line(4, 0.6))
    monkeypatch.setenv("RIGIDNET_THREADS", "1")
    one = expected_exp_rho(lt, model, SignalModel.none(), mc_engine(seed=9))
    monkeypatch.setenv("RIGIDNET_THREADS", "4")
    four = expected_exp_rho(lt, model, SignalModel.none(), mc_engine(seed=9))
    assert np.array_equal(one, four)


def test_expected_exp_rho_backends_agree():
    lt = leontief(make_line(4, 0.6))
    model = line_model()
    exact = expected_exp_rho(lt, model, SignalModel.none(), analytic_engine())
    assert np.allclose(exact, LAM / (LAM + lt.L[:, O]), atol=1e-14)
    mc = expected_exp_rho(lt, model, SignalModel.none(), mc_engine(seed=3))
    assert np.max(np.abs(mc - exact)) < 0.02

    rates = np.array([0.5, 0.25, 1.0, 2.0])
    ind = ShockModel.independent_exponential(rates)
    exact_ind = expected_exp_rho(lt, ind, SignalModel.none(), analytic_engine())
    expected = np.prod(rates / (rates + lt.L), axis=1)
    assert np.allclose(exact_ind, expected, atol=1e-14)


# ---------------------------------------------------------------------------
# normalized shocks


def test_normalized_shocks_on_the_line():
    econ = make_line(4, 0.6)
    lt = leontief(econ)
    eta2 = -0.9
    eta = np.array([0.0, eta2, 0.0, 0.0])
    tau, eps = normalized_shocks(
        lt, econ, analytic_engine(), line_model(), SignalModel.none(), eta
    )
    a = 0.6
    for k in range(1, 4):
        t = a ** (k - 1)
        assert tau[k] == pytest.approx((t + LAM) / LAM * np.exp(eta2 * t), rel=1e-12)
    assert tau[0] == 1.0
    assert eps[1] == pytest.approx(1.0, abs=1e-14)  # beta_2 + A_12 * tau_1
    assert np.all(tau > 0) and np.all(eps > 0)


def test_normalized_shocks_full_information():
    econ = make_line(4, 0.6)
    lt = leontief(econ)
    eta = np.array([0.0, -2.0, 0.0, 0.0])
    tau, eps = normalized_shocks(
        lt, econ, analytic_engine(), line_model(), SignalModel.full(), eta
    )
    assert np.array_equal(tau, np.ones(4))
    assert np.array_equal(eps, np.ones(4))


def test_discrete_tau_eps_unit_conditional_means(rng):
    for _ in range(20):
        econ = random_economy(rng)
        lt = leontief(econ)
        model, _ = random_single_node_discrete(rng, econ.n)
        law = tau_epsilon_law(econ, lt, model, SignalModel.none(), exact_engine())
        assert np.allclose(law.probs @ law.tau, 1.0, atol=1e-12)
        assert np.allclose(law.probs @ law.eps, 1.0, atol=1e-12)


# ---------------------------------------------------------------------------
# partition signals


def two_cell_signal(n=4, cut=-1.0):
    lo1 = np.full(n, -np.inf)
    hi1 = np.zeros(n)
    hi1[O] = cut
    lo2 = np.full(n, -np.inf)
    lo2[O] = cut
    hi2 = np.zeros(n)
    return SignalModel.partition([(lo1, hi1), (lo2, hi2)])


def test_check_partition_accepts_valid_and_rejects_overlap():
    model = line_model()
    check_partition(model, two_cell_signal(), 4)
    bad = SignalModel.partition(
        [
            (np.full(4, -np.inf), np.zeros(4)),
            (np.full(4, -np.inf), np.zeros(4)),
        ]
    )
    with pytest.raises(ShockModelError):
        check_partition(model, bad, 4)
    gap = SignalModel.partition([(np.full(4, -np.inf), np.full(4, -1.0))])
    with pytest.raises(ShockModelError):
        check_partition(model, gap, 4)


def test_partition_cell_expectations_match_oracle():
    econ = make_line(4, 0.6)
    lt = leontief(econ)
    signal = two_cell_signal()
    model = line_model()
    for cell, (lo, hi) in enumerate([(-np.inf, -1.0), (-1.0, 0.0)]):
        got = expected_exp_rho(lt, model, signal, analytic_engine(), cell)
        for k in range(4):
            t = lt.L[k, O]
            oracle = exp_shock_oracle(lambda u, t=t: np.exp(t * u), lo=lo, hi=hi)
            assert got[k] == pytest.approx(oracle, abs=1e-10)

    # conditioning on the realized cell keeps unit conditional means
    eta = np.array([0.0, -0.4, 0.0, 0.0])
    tau, eps = normalized_shocks(lt, econ, analytic_engine(), model, signal, eta)
    t2 = 1.0
    oracle = exp_shock_oracle(lambda u: np.exp(t2 * u), lo=-1.0, hi=0.0)
    assert tau[O] == pytest.approx(np.exp(-0.4) / oracle, rel=1e-12)


def test_partition_cell_outside_support_is_empty():
    model = line_model()
    lo = np.full(4, -np.inf)
    hi = np.zeros(4)
    lo[0] = -2.0
    hi[0] = -1.0  # excludes the degenerate zero coordinate
    signal = SignalModel.partition([(lo, hi)])
    lt = leontief(make_line(4, 0.6))
    with pytest.raises(EmptyCell):
        expected_exp_rho(lt, model, signal, analytic_engine(), 0)
