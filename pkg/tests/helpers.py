"""Shared builders for the test suite."""

import numpy as np

from rigidnet import economy_from_arrays, leontief
from rigidnet.shocks import ExpectationEngine, ShockModel, SignalModel

LINE_ALPHA = 0.6
LAM = 0.25
O = 1  # shocked sector (0-based): "sector 2"


def line_model():
    return ShockModel.single_node_exponential(O, LAM)


def analytic_engine():
    return ExpectationEngine(backend="analytic_exponential")


def exact_engine():
    return ExpectationEngine(backend="exact_discrete")


def mc_engine(num_draws=200_000, seed=0):
    return ExpectationEngine(backend="monte_carlo", num_draws=num_draws, seed=seed)


def random_economy(
    rng: np.random.Generator, n_max: int = 6, zero_theta_frac=0.3, max_colsum=0.9
):
    """Random substochastic technology with labor in every sector."""
    n = int(rng.integers(2, n_max + 1))
    A = np.zeros((n, n))
    for k in range(n):
        colsum = rng.uniform(0.05, max_colsum)
        m = int(rng.integers(1, n + 1))
        rows = rng.choice(n, size=m, replace=False)
        w = rng.dirichlet(np.ones(m))
        A[rows, k] = colsum * w
    gamma = rng.dirichlet(np.ones(n))
    theta = np.where(
        rng.random(n) < zero_theta_frac, 0.0, rng.uniform(0.2, 1.0, size=n)
    )
    return economy_from_arrays(A, gamma, theta)


def random_single_node_discrete(rng: np.random.Generator, n: int, points: int = 8):
    """Discrete shock on one random sector with the given support size."""
    o = int(rng.integers(0, n))
    vals = -np.sort(rng.exponential(scale=1.5, size=points))[::-1]
    vals[0] = 0.0  # include the no-shock point so eps stays spread out
    probs = rng.dirichlet(np.ones(points))
    pts = np.zeros((points, n))
    pts[:, o] = vals
    return ShockModel.discrete(pts, probs), o


def solve_line(theta: float):
    from rigidnet.pipeline import solve_cells
    from rigidnet.scenarios import make_line

    econ = make_line(4, LINE_ALPHA, theta=np.full(4, theta))
    L = leontief(econ)
    sol = solve_cells(econ, L, line_model(), SignalModel.none(), analytic_engine())[0]
    return econ, L, sol.profile, sol.equilibrium
