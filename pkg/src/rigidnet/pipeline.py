"""End-to-end solving: from validated inputs to per-cell equilibria."""

from dataclasses import dataclass

import numpy as np

from .debt import DebtProfile, debt_profile, solve_zeta_all
from .economy import Economy, LeontiefData
from .equilibrium import Equilibrium, Realization, maximal_equilibrium, realize
from .shocks import (
    ExpectationEngine,
    ShockModel,
    SignalModel,
    expected_exp_rho,
    resolve_cell,
)


@dataclass(frozen=True)
class CellSolution:
    cell: int | None
    profile: DebtProfile
    equilibrium: Equilibrium


def solve_cells(
    econ: Economy,
    L: LeontiefData,
    model: ShockModel,
    signal: SignalModel,
    engine: ExpectationEngine,
) -> list[CellSolution]:
    """Solve the debt fixed point and equilibrium for every signal cell.

    Constant signals produce a single cell (``None``); partitions one per
    box.  Fully revealing signals have state-contingent prices, so use
    :func:`full_information_solution` at a realization instead.
    """
    if signal.kind == "full":
        raise ValueError(
            "full-information equilibria are state contingent; "
            "use full_information_solution(econ, L, eta)"
        )
    cells = [None] if signal.kind != "partition" else list(range(len(signal.cells)))
    out = []
    for cell in cells:
        zeta = solve_zeta_all(econ, L, engine, model, signal, cell)
        profile = debt_profile(econ, L, zeta)
        e_rho = expected_exp_rho(L, model, signal, engine, cell)
        out.append(
            CellSolution(cell, profile, maximal_equilibrium(econ, L, profile, e_rho))
        )
    return out


def full_information_solution(
    econ: Economy, L: LeontiefData, eta
) -> tuple[DebtProfile, Equilibrium]:
    """Zero-debt equilibrium with pointwise expectations at a realization."""
    profile = debt_profile(econ, L, np.zeros(econ.n))
    e_rho = np.exp(L.L @ np.asarray(eta, dtype=np.float64))
    return profile, maximal_equilibrium(econ, L, profile, e_rho)


def realize_at(
    econ: Economy,
    L: LeontiefData,
    solutions: list[CellSolution],
    signal: SignalModel,
    eta,
) -> Realization:
    """Realize the equilibrium of the cell containing eta."""
    cell = resolve_cell(signal, np.asarray(eta, dtype=np.float64))
    if signal.kind == "full":
        profile, equil = full_information_solution(econ, L, eta)
        return realize(econ, L, profile, equil, eta)
    for sol in solutions:
        if sol.cell == cell:
            return realize(econ, L, sol.profile, sol.equilibrium, eta)
    raise KeyError(f"no solution for cell {cell}")
