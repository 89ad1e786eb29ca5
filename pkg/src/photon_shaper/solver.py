"""Forward dynamics of the pumped Lambda emitter coupled to a lossy cavity mode.

The excited-state amplitude obeys a Volterra integro-differential equation
whose kernel is a sum of two separable exponentials:

    dC2/dt = (i/2) W(t) e^{-i dp t} + int_0^t K(t, t') C2(t') dt'
    K(t, t') = -1/4 W(t) W(t') e^{-i dp (t-t')}
               -1/4 R^2 g(t) g(t') e^{-(i dk + 1/2)(t-t')}

with ``W = Omega_p``.  Two independent solvers are provided:

* :func:`solve_ode` carries both memory terms with auxiliary amplitudes (the
  ground amplitude ``C1`` and the effective cavity amplitude ``Cc``) and
  integrates the resulting local system with classical RK4.  O(n).
* :func:`solve_volterra` integrates the integro-differential equation itself,
  evaluating the memory integral by composite trapezoid over the stored
  history at every RK4 stage.  O(n^2); used as an oracle.

Envelope values at the RK4 half steps come from linear interpolation of the
envelope samples, identically in both solvers.  Rendering envelopes on a grid
twice as fine as the solver grid makes those half-step values exact.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .core import MAX_DT, Envelope, SystemParams, TimeGrid, eval_envelope, validate_params
from .errors import CapacityError, DomainError, RefinementError
from .io import write_csv

# n^2 budget of the Volterra path: t_end = 50 at dt = 1e-3
VOLTERRA_BUDGET = 50001**2


@dataclass(frozen=True)
class AmplitudeTrajectory:
    grid: TimeGrid
    c1: np.ndarray = field(repr=False)
    c2: np.ndarray = field(repr=False)
    c_cav: np.ndarray = field(repr=False)
    leaked: np.ndarray = field(repr=False)
    # coupling g(t_j) at the nodes; the observables' integral forms need it
    g: np.ndarray = field(repr=False, default=None)
    method: str = "ode"

    def __post_init__(self):
        if self.g is None:
            object.__setattr__(self, "g", np.zeros(self.grid.n))
        for name in ("c1", "c2", "c_cav", "leaked", "g"):
            a = np.array(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    @property
    def norm(self) -> np.ndarray:
        """``|C1|^2 + |C2|^2 + |Cc|^2 + leaked``; identically 1 in exact arithmetic."""
        return abs2(self.c1) + abs2(self.c2) + abs2(self.c_cav) + self.leaked

    def to_csv(self, path) -> None:
        write_csv(
            path,
            ["t", "Re C1", "Im C1", "Re C2", "Im C2", "Re Cc", "Im Cc", "leaked"],
            [self.t, self.c1.real, self.c1.imag, self.c2.real, self.c2.imag,
             self.c_cav.real, self.c_cav.imag, self.leaked],
        )


def abs2(z):
    return z.real * z.real + z.imag * z.imag


def kernel(p: SystemParams, pump: Envelope, g: Envelope, t: float, t_prime: float) -> complex:
    """Memory kernel ``K(t, t')`` of the excited-state equation."""
    if t_prime > t:
        raise DomainError(f"kernel needs t' <= t, got t={t}, t'={t_prime}")
    lag = t - t_prime
    wt, wtp = eval_envelope(pump, t), eval_envelope(pump, t_prime)
    gt, gtp = eval_envelope(g, t), eval_envelope(g, t_prime)
    pump_term = -0.25 * wt * wtp * cmath.exp(-1j * p.delta_p * lag)
    cav_term = -0.25 * p.rabi_R**2 * gt * gtp * cmath.exp(-1j * p.cavity_pole * lag)
    return pump_term + cav_term


def _prepare(p, pump, g, grid, force_coarse):
    validate_params(p)
    if grid.dt > MAX_DT and not force_coarse:
        raise RefinementError(
            f"dt={grid.dt} is coarser than {MAX_DT}; pass force_coarse=True to override"
        )
    tol = 1e-9 * max(grid.t_end, 1.0)
    for name, env in (("pump", pump), ("coupling", g)):
        if env.grid.t_end < grid.t_end - tol:
            raise DomainError(
                f"{name} envelope ends at t={env.grid.t_end}, before the solver window {grid.t_end}"
            )
    t = grid.t
    mid = t[:-1] + 0.5 * grid.dt
    return (pump.at(t), pump.at(mid), g.at(t), g.at(mid), t, mid)


def solve_ode(p: SystemParams, pump: Envelope, g: Envelope, grid: TimeGrid,
              force_coarse: bool = False) -> AmplitudeTrajectory:
    """Integrate the local (C1, C2, Cc, leaked) system with classical RK4.

    The leaked probability ``Gamma * int |Cc|^2`` is carried as a fourth state
    component so it shares the fourth-order accuracy of the amplitudes.
    """
    w_n, w_m, g_n, g_m, t, mid = _prepare(p, pump, g, grid, force_coarse)
    n, dt = grid.n, grid.dt
    half_r = 0.5 * p.rabi_R
    mu = p.cavity_rate
    gam = p.gamma_total
    # pump coupling (i/2) W(t) e^{-i dp t} at nodes and half steps
    a_n = (0.5j * w_n * np.exp(-1j * p.delta_p * t)).tolist()
    a_m = (0.5j * w_m * np.exp(-1j * p.delta_p * mid)).tolist()
    # cavity coupling (R/2) g(t)
    b_n = (half_r * g_n).tolist()
    b_m = (half_r * g_m).tolist()

    c1 = np.empty(n, complex)
    c2 = np.empty(n, complex)
    cc = np.empty(n, complex)
    lk = np.empty(n)
    y1, y2, y3, yl = 1 + 0j, 0j, 0j, 0.0
    c1[0], c2[0], cc[0], lk[0] = y1, y2, y3, yl
    h2, h6 = 0.5 * dt, dt / 6.0

    for j in range(n - 1):
        # Cdot1 = -conj(a) C2 ; Cdot2 = a C1 - b Cc ; Cdotc = b C2 - mu Cc ; Ldot = gam |Cc|^2
        a, b = a_n[j], b_n[j]
        ac = a.conjugate()
        k11 = -ac * y2
        k12 = a * y1 - b * y3
        k13 = b * y2 - mu * y3
        k1l = gam * (y3.real * y3.real + y3.imag * y3.imag)

        a, b = a_m[j], b_m[j]
        ac = a.conjugate()
        z1, z2, z3 = y1 + h2 * k11, y2 + h2 * k12, y3 + h2 * k13
        k21 = -ac * z2
        k22 = a * z1 - b * z3
        k23 = b * z2 - mu * z3
        k2l = gam * (z3.real * z3.real + z3.imag * z3.imag)

        z1, z2, z3 = y1 + h2 * k21, y2 + h2 * k22, y3 + h2 * k23
        k31 = -ac * z2
        k32 = a * z1 - b * z3
        k33 = b * z2 - mu * z3
        k3l = gam * (z3.real * z3.real + z3.imag * z3.imag)

        a, b = a_n[j + 1], b_n[j + 1]
        ac = a.conjugate()
        z1, z2, z3 = y1 + dt * k31, y2 + dt * k32, y3 + dt * k33
        k41 = -ac * z2
        k42 = a * z1 - b * z3
        k43 = b * z2 - mu * z3
        k4l = gam * (z3.real * z3.real + z3.imag * z3.imag)

        y1 = y1 + h6 * (k11 + 2 * k21 + 2 * k31 + k41)
        y2 = y2 + h6 * (k12 + 2 * k22 + 2 * k32 + k42)
        y3 = y3 + h6 * (k13 + 2 * k23 + 2 * k33 + k43)
        yl = yl + h6 * (k1l + 2 * k2l + 2 * k3l + k4l)
        c1[j + 1], c2[j + 1], cc[j + 1], lk[j + 1] = y1, y2, y3, yl

    return AmplitudeTrajectory(grid, c1, c2, cc, lk, g=g_n, method="ode")


def _cumtrapz(f: np.ndarray, dt: float) -> np.ndarray:
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * dt * (f[1:] + f[:-1]))
    return out


def solve_volterra(p: SystemParams, pump: Envelope, g: Envelope, grid: TimeGrid,
                   force_coarse: bool = False, budget: int = VOLTERRA_BUDGET) -> AmplitudeTrajectory:
    """RK4 on the integro-differential equation with trapezoidal memory.

    At a stage time ``s`` the memory ``int_0^s K(s,t') C2(t') dt'`` is the
    composite trapezoid over the stored nodes ``0..j`` plus a trapezoid over
    the last partial interval ``[t_j, s]`` that uses the stage's provisional
    ``C2(s)``.  Kernel phase factors are tabulated once per half-step lag.

    ``C1``, ``Cc`` and ``leaked`` are afterwards reconstructed by trapezoid
    quadrature of their defining integrals.
    """
    if grid.n**2 > budget:
        raise CapacityError(
            f"Volterra path needs n^2 = {grid.n**2:.3g} > budget {budget:.3g}; use solve_ode"
        )
    w_n, w_m, g_n, g_m, t, mid = _prepare(p, pump, g, grid, force_coarse)
    n, dt = grid.n, grid.dt
    R2 = p.rabi_R**2

    lags = 0.5 * dt * np.arange(2 * n + 1)
    ep = np.exp(-1j * p.delta_p * lags)
    ec = np.exp(-1j * p.cavity_pole * lags)
    # reversed even/odd lag tables: rev[N - j + m] = table[lag index of (j - m)]
    ep_even, ep_odd = ep[0::2][::-1].copy(), ep[1::2][::-1].copy()
    ec_even, ec_odd = ec[0::2][::-1].copy(), ec[1::2][::-1].copy()
    Ne, No = ep_even.size - 1, ep_odd.size - 1

    drive_n = 0.5j * w_n * np.exp(-1j * p.delta_p * t)
    drive_m = 0.5j * w_m * np.exp(-1j * p.delta_p * mid)

    c2 = np.zeros(n, complex)
    hp = np.zeros(n, complex)  # W(t_m) C2(t_m)
    hc = np.zeros(n, complex)  # g(t_m) C2(t_m)
    ep1, ec1, ep2, ec2 = ep[1], ec[1], ep[2], ec[2]

    # trapezoid sums over nodes 0..j at lag offset 0 (stage time t_j)
    sp0 = sc0 = 0j
    for j in range(n - 1):
        y = c2[j]
        # lag offset 1 (t_j + dt/2) and 2 (t_{j+1}); node 0 has h = 0 so only node j is halved
        sl = slice(0, j + 1)
        sp1 = dt * np.dot(ep_odd[No - j:No + 1], hp[sl]) - 0.5 * dt * ep1 * hp[j]
        sc1 = dt * np.dot(ec_odd[No - j:No + 1], hc[sl]) - 0.5 * dt * ec1 * hc[j]
        sp2 = dt * np.dot(ep_even[Ne - j - 1:Ne], hp[sl]) - 0.5 * dt * ep2 * hp[j]
        sc2 = dt * np.dot(ec_even[Ne - j - 1:Ne], hc[sl]) - 0.5 * dt * ec2 * hc[j]

        wj, gj = w_n[j], g_n[j]
        wm, gm = w_m[j], g_m[j]
        wn1, gn1 = w_n[j + 1], g_n[j + 1]

        k1 = drive_n[j] - 0.25 * wj * sp0 - 0.25 * R2 * gj * sc0

        def mem_mid(z):
            sp = sp1 + 0.25 * dt * (ep1 * hp[j] + wm * z)
            sc = sc1 + 0.25 * dt * (ec1 * hc[j] + gm * z)
            return -0.25 * wm * sp - 0.25 * R2 * gm * sc

        k2 = drive_m[j] + mem_mid(y + 0.5 * dt * k1)
        k3 = drive_m[j] + mem_mid(y + 0.5 * dt * k2)
        z = y + dt * k3
        sp = sp2 + 0.5 * dt * (ep2 * hp[j] + wn1 * z)
        sc = sc2 + 0.5 * dt * (ec2 * hc[j] + gn1 * z)
        k4 = drive_n[j + 1] - 0.25 * wn1 * sp - 0.25 * R2 * gn1 * sc

        y_new = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        c2[j + 1] = y_new
        hp[j + 1] = wn1 * y_new
        hc[j + 1] = gn1 * y_new
        sp0 = sp2 + 0.5 * dt * (ep2 * hp[j] + hp[j + 1])
        sc0 = sc2 + 0.5 * dt * (ec2 * hc[j] + hc[j + 1])

    # C1 = 1 + int (i/2) W e^{i dp t'} C2 dt'
    c1 = 1.0 + _cumtrapz(0.5j * w_n * np.exp(1j * p.delta_p * t) * c2, dt)
    # Cc(t_j) = (R/2) int_0^{t_j} g C2 e^{-mu (t_j - t')} dt'
    ec_even_fwd = ec[0::2]
    cc = np.zeros(n, complex)
    for j in range(1, n):
        v = ec_even_fwd[j::-1] * hc[: j + 1]
        cc[j] = 0.5 * p.rabi_R * dt * (v.sum() - 0.5 * (v[0] + v[-1]))
    leaked = p.gamma_total * _cumtrapz(abs2(cc), dt)
    return AmplitudeTrajectory(grid, c1, c2, cc, leaked, g=g_n, method="volterra")
