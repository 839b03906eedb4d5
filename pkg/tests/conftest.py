import pytest

from fogsim.harness import run_experiment
from fogsim.presets import DEFAULT_SEED, PRESETS, SWEEP_RATES


@pytest.fixture(scope="session")
def calibration_sweeps():
    """One shared run of the four-configuration rate sweep (about a second)."""
    return {name: run_experiment(name, SWEEP_RATES, DEFAULT_SEED) for name in PRESETS}
