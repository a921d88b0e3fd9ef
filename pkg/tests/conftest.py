import math

import pytest
from hypothesis import settings

from kerrhybrid.config import ConstantDrive, KerrNonlinearity, SimConfig

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

MHZ = 2.0 * math.pi * 1e6

_CRITERIA = {}


def record_criterion(number, passed, detail):
    """Store the outcome line of an acceptance criterion for the terminal summary."""
    _CRITERIA[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(_CRITERIA[number])


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])


def fig4_config(n_b=3.2e-3, t_final_kappa=15.0, dt_kappa=0.1, eta_mhz=-0.02, eps_mhz=32.0):
    kappa = 5.0 * MHZ
    return SimConfig(
        kappa=kappa,
        nonlinearity=KerrNonlinearity(eta_mhz * MHZ),
        drive=ConstantDrive(eps_mhz * MHZ),
        n_b=n_b,
        omega_r0=6000.0 * MHZ,
        t_final=t_final_kappa / kappa,
        dt_out=dt_kappa / kappa,
    )


@pytest.fixture
def fig4():
    return fig4_config()
