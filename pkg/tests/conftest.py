from pathlib import Path

import pytest

from bpdg.scenario import design_scenario, read_scenario
from bpdg.simulator import run

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


@pytest.fixture(scope="session")
def case_a():
    return read_scenario(SCENARIO_DIR / "case_a.cfg")


@pytest.fixture(scope="session")
def case_b():
    return [read_scenario(SCENARIO_DIR / f"case_b_{i}.cfg") for i in (1, 2, 3)]


@pytest.fixture(scope="session")
def case_a_designs(case_a):
    return design_scenario(case_a)


@pytest.fixture(scope="session")
def case_a_run(case_a, case_a_designs):
    designs, _ = case_a_designs
    return run(case_a, designs=designs)
