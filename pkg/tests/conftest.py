import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pointsel.scenario import default_scenario
from pointsel.sweeps import calibrate


@pytest.fixture(scope="session")
def calibrated_scenario():
    """One calibration run shared by every test that needs realistic noise."""
    scenario = default_scenario(name="calibrated", seed=42)
    calibrate(scenario, trials_per_cell=30, seed=42)
    return scenario
