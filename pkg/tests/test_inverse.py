import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photon_shaper import (
    DesignTarget, InfeasibleDesignError, ParameterError, PulseSpec, SingularCouplingError,
    SystemParams, UnphysicalTargetError, c2_from_target, make_grid, pump_coupling_rk4,
    pump_from_target, render_pulse, round_trip, solve_ode, target_from_envelope,
    target_from_profile, wavepacket,
)
from photon_shaper.inverse import NonRealPumpWarning, _derivative, big_d, big_d_direct
from photon_shaper.inverse import normalized_l2_distance

from conftest import const

GRID = make_grid(200, 1e-3)
G1 = const(GRID)
DOUBLE = PulseSpec("double_gaussian", 1, centers=(70, 130), widths=(10, 10))
FLAT = PulseSpec("flattop", 1, 100, 40, ramp=8)
SINGLE = PulseSpec("gaussian", 1, 100, 15)


def target(spec, eta, grid=GRID):
    return target_from_envelope(render_pulse(spec, grid), eta)


def test_target_normalization_and_phase():
    t = target(SINGLE, 0.5)
    t.check()
    assert np.trapezoid(np.abs(t.shape) ** 2, dx=GRID.dt) == pytest.approx(1, abs=1e-12)
    assert np.all(t.shape.real == 0) and np.all(t.shape.imag <= 0)


def test_target_checks():
    grid = make_grid(10, 1e-2)
    with pytest.raises(ParameterError):
        DesignTarget(grid, np.zeros(grid.n), 0.5).check()
    early = target_from_profile(np.exp(-grid.t), grid, 0.5)
    with pytest.raises(ParameterError, match="vanish"):
        early.check()
    with pytest.raises(ParameterError):
        DesignTarget(grid, np.zeros(5), 0.5)
    with pytest.raises(ParameterError):
        target_from_profile(-np.ones(grid.n), grid, 0.5)


def test_c2_zero_where_target_vanishes():
    prof = render_pulse(PulseSpec("sin2", 1, 100, 30), GRID).samples
    c2 = c2_from_target(target_from_profile(prof, GRID, 0.3), SystemParams(8), G1)
    quiet = (GRID.t < 69.9) | (GRID.t > 130.1)
    assert np.all(c2[quiet] == 0)


def test_c2_square_root_scaling():
    p = SystemParams(4)
    a = c2_from_target(target(SINGLE, 0.1), p, G1)
    b = c2_from_target(target(SINGLE, 0.4), p, G1)
    assert np.allclose(b, 2 * a, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("p", [SystemParams(4.0), SystemParams(4.0, 1.0, 0.5)])
def test_c2_recovers_forward_solution(p):
    pump = render_pulse(PulseSpec("gaussian", 0.3, 80, 15), GRID.refined(2))
    tr = solve_ode(p, pump, G1, GRID)
    wp = wavepacket(tr, p)
    tgt = DesignTarget(GRID, wp.phi, wp.eta_T)
    tgt.check()
    assert np.max(np.abs(c2_from_target(tgt, p, G1) - tr.c2)) <= 1e-3


def test_singular_coupling():
    g = render_pulse(PulseSpec("gaussian", 1, 20, 5), GRID)
    with pytest.raises(SingularCouplingError):
        c2_from_target(target(SINGLE, 0.5), SystemParams(8), g)
    with pytest.raises(SingularCouplingError):
        c2_from_target(target(SINGLE, 0.5), SystemParams(0), G1)


def test_unphysical_target():
    narrow = target(PulseSpec("gaussian", 1, 100, 0.3), 0.9)
    with pytest.raises(UnphysicalTargetError):
        c2_from_target(narrow, SystemParams(0.5), G1)


def test_big_d_trivial_cases():
    p = SystemParams(3.0, 0.4)
    assert np.all(big_d(np.zeros(GRID.n, complex), p, G1, GRID) == 0)
    c2 = c2_from_target(target(SINGLE, 0.3), SystemParams(3.0), G1)
    d = big_d(c2, SystemParams(0.0), G1, GRID)
    assert np.array_equal(d, _derivative(c2, GRID.dt))


def test_big_d_recursion_matches_quadrature():
    grid = make_grid(20, 1e-3)
    rng = np.random.default_rng(7)
    t = grid.t
    c2 = np.zeros(grid.n, complex)
    for _ in range(4):
        a, c, w = rng.normal() + 1j * rng.normal(), rng.uniform(4, 16), rng.uniform(1, 3)
        c2 += 0.2 * a * np.exp(-((t - c) ** 2) / (2 * w * w))
    g = render_pulse(PulseSpec("gaussian", 1, 9, 6), grid)
    p = SystemParams(5.0, 0.8)
    assert np.max(np.abs(big_d(c2, p, g, grid) - big_d_direct(c2, p, g, grid))) <= 1e-8


@pytest.mark.parametrize("spec,eta", [(DOUBLE, 0.9), (FLAT, 0.5), (SINGLE, 0.2)])
def test_closed_form_matches_rk4(spec, eta):
    p = SystemParams(8)
    d = pump_from_target(target(spec, eta), p, G1)
    f_rk4 = pump_coupling_rk4(d, p, GRID)
    ok = np.isfinite(f_rk4) & (d.radicand.real >= 0.1)
    assert ok.sum() > GRID.n // 4
    assert np.max(np.abs(f_rk4[ok] - d.q[ok])) <= 1e-6


def test_weak_target_tracks_drive():
    p = SystemParams(8)
    d = pump_from_target(target(SINGLE, 0.005), p, G1)
    assert np.max(np.abs(d.pump.samples - 2 * np.abs(d.d))) <= 0.01 * d.pump.peak


def test_pump_scaling_law():
    p = SystemParams(8)
    a = pump_from_target(target(SINGLE, 0.001), p, G1).pump.samples
    b = pump_from_target(target(SINGLE, 0.004), p, G1).pump.samples
    m = a > 0.01 * a.max()
    assert np.max(np.abs(b[m] / (2 * a[m]) - 1)) <= 0.01


def test_second_peak_higher_for_high_efficiency():
    d = pump_from_target(target(DOUBLE, 0.9), SystemParams(8), G1)
    w = d.pump.samples
    mid = GRID.n // 2
    assert w[mid:].max() > w[:mid].max()


def test_infeasible_efficiency():
    with pytest.raises(InfeasibleDesignError):
        pump_from_target(target(SINGLE, 0.95), SystemParams(8), G1)


@settings(max_examples=8, deadline=None)
@given(st.floats(0.05, 0.97), st.floats(0.05, 0.97))
def test_feasibility_monotone(e1, e2):
    lo, hi = sorted((e1, e2))
    p = SystemParams(8)
    try:
        pump_from_target(target(FLAT, hi), p, G1)
    except InfeasibleDesignError:
        return
    pump_from_target(target(FLAT, lo), p, G1)


def test_real_pump_diagnostic():
    d = pump_from_target(target(SINGLE, 0.5), SystemParams(8), G1)
    assert d.phase_max <= 1e-3 and not d.warnings
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        d = pump_from_target(target(SINGLE, 0.5), SystemParams(8, 1.0, 0.0), G1)
    assert d.phase_max > 1e-3 and d.warnings
    assert any(issubclass(w.category, NonRealPumpWarning) for w in caught)


def test_low_efficiency_pump_follows_shape():
    rt = round_trip(target(FLAT, 0.2), SystemParams(8), G1)
    assert normalized_l2_distance(rt.pump.samples, rt.achieved_phi, GRID.dt) <= 0.1


@pytest.mark.parametrize("R", [4.0, 8.0])
@pytest.mark.parametrize("spec", [DOUBLE, FLAT, SINGLE], ids=["double", "flattop", "gaussian"])
@pytest.mark.parametrize("eta", [0.2, 0.5, 0.9])
def test_round_trip_regression(R, spec, eta):
    rt = round_trip(target(spec, eta), SystemParams(R), G1)
    assert rt.l2_error <= 0.01
    assert rt.eta_error <= 0.01
