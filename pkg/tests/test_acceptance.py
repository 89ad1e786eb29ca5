"""Acceptance suite: every numbered criterion at its stated tolerance.

Each test records one PASS/FAIL line (printed in the terminal summary) and
then asserts.  Forward runs are cached so the efficiency bound of criterion 4
is checked over exactly the runs made by the other criteria.
"""
import time
from functools import lru_cache

import numpy as np

from photon_shaper import (
    PulseSpec, SystemParams, efficiency_curve, intensity, make_grid, pump_coupling_rk4,
    render_pulse, round_trip, solve_ode, solve_volterra, spectrum, target_from_envelope,
    wavepacket, wigner_mode1,
)
from photon_shaper.core import constant_envelope
from photon_shaper.inverse import normalized_l2_distance

from conftest import ACCEPTANCE_RESULTS

# every forward or round-trip run of the suite: label -> max_t eta(t) - ratio
ETA_EXCESS = {}


def record(crit, ok, detail):
    ACCEPTANCE_RESULTS.append((crit, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'}  criterion {crit}: {detail}")
    assert ok, f"criterion {crit}: {detail}"


def forward(label, p, pump_spec, g_spec, t_end, dt=1e-3):
    """Run solve_ode with pulses rendered on the half-step grid."""
    grid = make_grid(t_end, dt)
    fine = grid.refined(2)
    pump = render_pulse(pump_spec, fine)
    g = render_pulse(g_spec, fine)
    t0 = time.perf_counter()
    tr = solve_ode(p, pump, g, grid)
    wall = time.perf_counter() - t0
    eta = efficiency_curve(tr, p)
    ETA_EXCESS[label] = float(eta.max() - p.gamma_rad_ratio)
    return tr, eta, wall, pump


# ---- 1: vSTIRAP efficiency -----------------------------------------------

FIG2_PARAMS = SystemParams(5.0, 1.0, 1.0, 0.9)
FIG2_G = PulseSpec("gaussian", 1.0, 100, 40)
FIG2_PUMPS = (
    PulseSpec("gaussian", 5.0, 175, 40),
    PulseSpec("sin2", 5.0, 175, 40),
    PulseSpec("flattop", 5.0, 175, 40, ramp=15),
)


@lru_cache(maxsize=None)
def fig2_run(i):
    spec = FIG2_PUMPS[i]
    _, eta, wall, _ = forward(f"fig2/{spec.family}", FIG2_PARAMS, spec, FIG2_G, 350)
    return float(eta[-1]), wall


def test_criterion_01_vstirap_efficiency():
    res = [fig2_run(i) for i in range(3)]
    etas = [e for e, _ in res]
    walls = [w for _, w in res]
    # 1e-9 slack for roundoff at the ratio bound
    ok = all(0.85 <= e <= 0.90 + 1e-9 for e in etas) and max(walls) <= 10.0
    record(1, ok, "eta(T) = " + ", ".join(f"{s.family}:{e:.6f}" for s, e in zip(FIG2_PUMPS, etas))
           + f" in [0.85, 0.90]; max runtime {max(walls):.2f} s <= 10 s")


# ---- 2, 3: weak drive and orderings ----------------------------------------

WEAK = SystemParams(2.0, 0.0, 0.0, 0.9)
FLAT_G = PulseSpec("constant", 1.0)


def single_peak(amp):
    return PulseSpec("gaussian", amp, 100, 21.3)


def double_peak(amp):
    return PulseSpec("double_gaussian", amp, centers=(75, 125), widths=(15, 15))


@lru_cache(maxsize=None)
def weak_run(amp, rabi=2.0, double=False):
    p = WEAK.replace(rabi_R=rabi)
    spec = double_peak(amp) if double else single_peak(amp)
    tr, eta, _, pump = forward(f"{'double' if double else 'single'}/R={rabi}/A={amp}", p, spec,
                               FLAT_G, 200)
    out = {"eta_T": float(eta[-1])}
    if amp == 0.1 and rabi == 2.0 and not double:
        wp = wavepacket(tr, p)
        out["shape_l2"] = normalized_l2_distance(wp.phi, pump.at(wp.tau), tr.grid.dt)
    return out


def test_criterion_02_weak_drive():
    r = weak_run(0.1)
    eta = r["eta_T"]
    ratio = weak_run(0.1)["eta_T"] / weak_run(0.05)["eta_T"]
    ratio_hi = weak_run(0.2)["eta_T"] / eta
    ok = abs(eta - 0.081) <= 0.03 and abs(ratio / 4 - 1) <= 0.08 and r["shape_l2"] <= 0.05
    record(2, ok, f"eta(T) = {eta:.5f} (0.081 +- 0.03); eta(0.1)/eta(0.05) = {ratio:.3f} (4 +- 8%, "
                  f"eta(0.2)/eta(0.1) = {ratio_hi:.3f} for reference); shape L2 = {r['shape_l2']:.4f} <= 0.05")


def test_criterion_03_orderings():
    amps = (0.1, 0.4, 0.7, 1.0, 1.5)
    e_amp = [weak_run(a)["eta_T"] for a in amps]
    e_single = [weak_run(0.7, r)["eta_T"] for r in (1.0, 4.0, 7.0)]
    e_double = [weak_run(0.7, r, True)["eta_T"] for r in (1.0, 4.0, 12.0)]
    inc = all(b > a for a, b in zip(e_amp, e_amp[1:]))
    dec1 = all(b < a for a, b in zip(e_single, e_single[1:]))
    dec2 = all(b < a for a, b in zip(e_double, e_double[1:]))
    fmt = lambda xs: "[" + ", ".join(f"{x:.6g}" for x in xs) + "]"  # noqa: E731
    record(3, inc and dec1 and dec2,
           f"increasing in Omega {fmt(e_amp)}; decreasing in R single {fmt(e_single)}, "
           f"double {fmt(e_double)}")


# ---- 5, 6: cross-equivalence and identities ---------------------------------

MATRIX_G = PulseSpec("gaussian", 1.0, 7.0, 5.0)
MATRIX_PUMPS = {
    "gaussian": PulseSpec("gaussian", 1.0, 8.0, 2.0),
    "double": PulseSpec("double_gaussian", 1.0, centers=(6.0, 13.0), widths=(1.5, 1.5)),
}
MATRIX = [(r, d, k) for r in (0.0, 2.0, 8.0) for d in (0.0, 1.0) for k in MATRIX_PUMPS]


@lru_cache(maxsize=None)
def matrix_case(r, d, k):
    grid = make_grid(20, 1e-3)
    fine = grid.refined(2)
    p = SystemParams(r, d, d, 0.9)
    pump = render_pulse(MATRIX_PUMPS[k], fine)
    g = render_pulse(MATRIX_G, fine)
    t0 = time.perf_counter()
    a = solve_ode(p, pump, g, grid)
    b = solve_volterra(p, pump, g, grid)
    wall = time.perf_counter() - t0
    eta = efficiency_curve(a, p)
    ETA_EXCESS[f"matrix/R={r}/D={d}/{k}"] = float(eta.max() - p.gamma_rad_ratio)
    return a, b, p, wall


def test_criterion_05_cross_equivalence():
    errs, total = [], 0.0
    for case in MATRIX:
        a, b, _, wall = matrix_case(*case)
        errs.append(float(np.max(np.abs(a.c2 - b.c2))))
        total += wall
    ok = max(errs) <= 1e-6 and total <= 60.0
    record(5, ok, f"max |C2_ode - C2_volterra| = {max(errs):.2e} <= 1e-6 over 12 cases; "
                  f"runtime {total:.1f} s <= 60 s")


def test_criterion_06_identities():
    drift = ident = prop = flux = pars = 0.0
    for case in MATRIX:
        tr, _, p, _ = matrix_case(*case)
        drift = max(drift, float(np.max(np.abs(tr.norm - 1))))
        eta = efficiency_curve(tr, p)
        if case[0] == 0:
            continue  # no cavity coupling: nothing is emitted
        dbl = efficiency_curve(tr, p, method="double_integral")
        ident = max(ident, float(np.max(np.abs(eta - dbl))))
        wp = wavepacket(tr, p)
        prop = max(prop, float(np.max(np.abs(
            np.sqrt(wp.eta_T) * np.abs(wp.phi) - np.sqrt(p.gamma_rad_ratio) * np.abs(tr.c_cav)))))
        flux = max(flux, abs(np.trapezoid(intensity(wp), dx=tr.grid.dt)
                             + p.gamma_rad_ratio * abs(tr.c_cav[-1]) ** 2 - wp.eta_T))
        pars = max(pars, abs(spectrum(tr, p, points=4001, span=20).integral() - eta[-1]))
    ok = drift <= 1e-8 and ident <= 1e-6 and prop <= 1e-6 and flux <= 1e-6 and pars <= 1e-3
    record(6, ok, f"norm drift {drift:.1e}, eta identity {ident:.1e}, phi ~ Cc {prop:.1e}, "
                  f"flux {flux:.1e} (each <= 1e-8/1e-6), Parseval {pars:.1e} <= 1e-3")


# ---- 7: Rabi oracle ----------------------------------------------------------

def test_criterion_07_rabi():
    grid = make_grid(20, 1e-3)
    p = SystemParams(0.0)
    pump, g = constant_envelope(grid, 1.0), constant_envelope(grid, 0.0)
    exact = np.abs(np.sin(grid.t / 2))
    e_ode = float(np.max(np.abs(np.abs(solve_ode(p, pump, g, grid).c2) - exact)))
    e_vol = float(np.max(np.abs(np.abs(solve_volterra(p, pump, g, grid).c2) - exact)))
    record(7, max(e_ode, e_vol) <= 1e-6,
           f"sup | |C2| - |sin(t/2)| | = {e_ode:.1e} (ode), {e_vol:.1e} (volterra) <= 1e-6")


# ---- 8, 9: inverse design ----------------------------------------------------

DESIGN_GRID = make_grid(200, 1e-3)
DESIGN_P = SystemParams(8.0, 0.0, 0.0, 0.9)
DESIGN_TARGETS = {
    "double": PulseSpec("double_gaussian", 1.0, centers=(70, 130), widths=(10, 10)),
    "flattop": PulseSpec("flattop", 1.0, 100, 40, ramp=8),
}


@lru_cache(maxsize=None)
def design(kind, eta, g_spec=PulseSpec("constant", 1.0)):
    g = render_pulse(g_spec, DESIGN_GRID)
    tgt = target_from_envelope(render_pulse(DESIGN_TARGETS[kind], DESIGN_GRID), eta)
    t0 = time.perf_counter()
    rt = round_trip(tgt, DESIGN_P, g)
    wall = time.perf_counter() - t0
    ETA_EXCESS[f"design/{kind}/{eta}/{g_spec.family}"] = rt.achieved_eta - DESIGN_P.gamma_rad_ratio
    return rt, g, wall


def test_criterion_08_round_trip():
    parts, ok = [], True
    for kind in DESIGN_TARGETS:
        for eta in (0.2, 0.9):
            rt, _, wall = design(kind, eta)
            f_rk4 = pump_coupling_rk4(rt.design, DESIGN_P, DESIGN_GRID)
            m = np.isfinite(f_rk4)
            diff = np.abs(f_rk4[m] - rt.design.q[m])
            # the comparison is defined where the radicand stays >= 0.1; closer to
            # the pump cut-off the direct integration is ill-conditioned
            fdiff = float(np.max(diff[rt.design.radicand.real[m] >= 0.1]))
            good = rt.l2_error <= 0.01 and rt.eta_error <= 0.01 and fdiff <= 1e-6 and wall <= 10
            parts.append(f"{kind}/{eta}: L2 {rt.l2_error:.1e} deta {rt.eta_error:.1e} "
                         f"f {fdiff:.1e} (all t {diff.max():.0e}) {wall:.1f}s")
            ok &= good
    rt, _, _ = design("double", 0.9)
    w = rt.pump.samples
    mid = int(round(100 / DESIGN_GRID.dt))  # minimum of the double-peak target
    p1, p2 = w[:mid].max(), w[mid:].max()
    ok &= p2 > p1
    record(8, ok, "; ".join(parts) + f"; double/0.9 pump peaks {p1:.3f} < {p2:.3f}")


OSC_G = PulseSpec("oscillating", 1.0, depth=0.1, period=10.0)


def _detrended(y, t):
    return y - np.polyval(np.polyfit(t, y, 3), t)


def inset_correlations():
    t = DESIGN_GRID.t
    win = (t >= 80) & (t <= 120)
    out = []
    for eta in (0.2, 0.9):
        rt, g, _ = design("flattop", eta, OSC_G)
        r = np.corrcoef(_detrended(rt.pump.samples[win], t[win]),
                        _detrended(g.samples[win], t[win]))[0, 1]
        out.append((eta, rt.l2_error, float(r)))
    return out


def test_criterion_09a_oscillating_coupling_shape():
    res = inset_correlations()
    ok = all(l2 <= 0.02 for _, l2, _ in res)
    record("9a", ok, "round-trip L2 " + ", ".join(f"eta={e}: {l2:.1e}" for e, l2, _ in res)
           + " <= 0.02")


def test_criterion_09b_oscillating_coupling_anticorrelation():
    res = inset_correlations()
    ok = all(r < 0 for _, _, r in res)
    record("9b", ok, "Pearson(pump, g) over the plateau "
           + ", ".join(f"eta={e}: {r:+.3f}" for e, _, r in res)
           + " must be < 0 (designed pump follows g instead)")


# ---- 10: convergence order -----------------------------------------------------

def test_criterion_10_convergence_order():
    p = SystemParams(12.0, 1.0, 1.0, 0.9)
    pump_spec = PulseSpec("gaussian", 8.0, 5.0, 0.5)
    g_spec = PulseSpec("gaussian", 1.0, 4.0, 3.0)

    def end_c2(dt):
        grid = make_grid(10.0, dt)
        fine = grid.refined(2)
        tr = solve_ode(p, render_pulse(pump_spec, fine), render_pulse(g_spec, fine), grid)
        return tr.c2[-1]

    ref = end_c2(1.25e-4)
    errs = [abs(end_c2(dt) - ref) for dt in (4e-3, 2e-3, 1e-3)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(8 <= r <= 32 for r in ratios)
    record(10, ok, "endpoint errors " + ", ".join(f"{e:.2e}" for e in errs)
           + "; halving ratios " + ", ".join(f"{r:.2f}" for r in ratios) + " in [8, 32] (16 +- x2)")


# ---- 11: Wigner -------------------------------------------------------------

def test_criterion_11_wigner():
    x = np.linspace(-5, 5, 2001)
    re, im = np.meshgrid(x, x, indexing="ij")
    inside = re**2 + im**2 <= 25
    worst_int = worst_0 = 0.0
    for eta in (0.0, 0.5, 1.0):
        w = np.where(inside, wigner_mode1(eta, re, im), 0.0)
        total = np.trapezoid(np.trapezoid(w, x, axis=1), x)
        worst_int = max(worst_int, abs(total - 1))
        worst_0 = max(worst_0, abs(wigner_mode1(eta, 0.0, 0.0) - 2 / np.pi * (1 - 2 * eta)))
    record(11, worst_int <= 1e-6 and worst_0 <= 1e-12,
           f"|int W d2alpha - 1| = {worst_int:.1e} <= 1e-6; |W(0) - (2/pi)(1-2 eta)| = {worst_0:.1e} <= 1e-12")


# ---- 4: efficiency bound over the whole regression matrix ---------------------

def test_criterion_04_efficiency_bound():
    # make sure every run exists even when this test is selected alone
    for i in range(3):
        fig2_run(i)
    for a in (0.05, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5):
        weak_run(a)
    for r in (1.0, 4.0, 7.0):
        weak_run(0.7, r)
    for r in (1.0, 4.0, 12.0):
        weak_run(0.7, r, True)
    for case in MATRIX:
        matrix_case(*case)
    for kind in DESIGN_TARGETS:
        for eta in (0.2, 0.9):
            design(kind, eta)
    inset_correlations()
    worst = max(ETA_EXCESS, key=ETA_EXCESS.get)
    ok = ETA_EXCESS[worst] <= 1e-9
    record(4, ok, f"max_t eta(t) - ratio = {ETA_EXCESS[worst]:.2e} <= 1e-9 over {len(ETA_EXCESS)} runs "
                  f"(worst: {worst})")
