import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from expressnet import assignment  # noqa: E402
from expressnet.scenario import fixture_path, load_scenario  # noqa: E402

CHECKED = {"solutions": 0}


def _capacity_guard(solution):
    for arc, load in solution.arc_loads.items():
        cap = solution.capacities.get(arc)
        if cap is not None:
            assert load <= cap + 1e-6, f"arc {arc} carries {load} > capacity {cap} ({solution.rule})"
    CHECKED["solutions"] += 1


assignment.SOLUTION_HOOKS.append(_capacity_guard)


@pytest.fixture(scope="session")
def scenario():
    return load_scenario(fixture_path())


@pytest.fixture(scope="session")
def net(scenario):
    return scenario.network
