import numpy as np
import pytest


def balance_residuals(scenario, solution):
    """Recompute the hourly nodal energy balance from a DispatchSolution.

    Independent of the LP: supply + shed + net imports (grid-loss adjusted)
    minus demand, per node and hour.
    """
    H = solution.hours
    res = np.zeros((len(scenario.nodes), H))
    gl_in = 1.0 - scenario.grid_loss / 2.0
    gl_out = 1.0 + scenario.grid_loss / 2.0
    for ni, node in enumerate(scenario.nodes):
        total = np.zeros(H)
        for ci, c in enumerate(scenario.clusters):
            if c.node == node:
                total += solution.gen[ci]
        for si, s in enumerate(scenario.storages):
            if s.node == node:
                total += solution.sdis[si] - solution.schg[si]
        total += solution.shed[ni]
        for li, (a, b, _) in enumerate(scenario.interconnectors):
            if b == node:
                total += gl_in * solution.flow[li]
            if a == node:
                total -= gl_out * solution.flow[li]
        res[ni] = total - scenario.demand[node].values
    return res


@pytest.fixture
def toy3():
    from mefkit.toys import toy_de_3tech

    return toy_de_3tech(3)


@pytest.fixture
def toy_scenario_dir():
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "scenarios" / "toy_de_3tech"
    if not path.exists():
        pytest.skip("bundled scenario missing")
    return path
