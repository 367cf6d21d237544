from pathlib import Path

import pytest

from pacesim import load_scenario

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

REFERENCE = SCENARIO_DIR / "reference.json"
CHAIN = SCENARIO_DIR / "two_state_chain.json"


@pytest.fixture(scope="session")
def reference_config():
    return load_scenario(REFERENCE)


@pytest.fixture(scope="session")
def chain_config():
    return load_scenario(CHAIN)
