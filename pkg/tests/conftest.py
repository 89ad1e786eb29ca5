import numpy as np
import pytest

from photon_shaper import PulseSpec, SystemParams, make_grid, render_pulse
from photon_shaper.core import constant_envelope


@pytest.fixture
def short_run():
    """A generic driven run: detuned, non-trivial coupling shape, t_end = 20."""
    grid = make_grid(20.0, 1e-3)
    p = SystemParams(rabi_R=2.0, delta_k=1.0, delta_p=0.5, gamma_rad_ratio=0.9)
    pump = render_pulse(PulseSpec("gaussian", 1.2, 8.0, 2.5), grid.refined(2))
    g = render_pulse(PulseSpec("gaussian", 1.0, 7.0, 5.0), grid.refined(2))
    return p, pump, g, grid


def const(grid, value=1.0):
    return constant_envelope(grid, value)


def trapz(y, dx):
    return float(np.trapezoid(y, dx=dx))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {crit}: {detail}")
