import numpy as np
import pytest

from thermistor.constitutive import ConductivityModel, Constant, HeatModel


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def ohmic():
    """p = 2, sigma0 = 1: linear Ohm's law."""
    return ConductivityModel("regularized_plap", 2.0, 1.0, Constant(1.0))


@pytest.fixture
def self_heating():
    return HeatModel(Constant(1.0), 1.0, 0.0, Constant(1.0))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, title, detail = RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})")
