"""Pump synthesis for a prescribed outgoing single-photon wave packet.

Pipeline for a target ``phi(tau)`` (retarded time, unit L2 norm) and a
requested efficiency ``eta``:

1. ``c2_from_target`` inverts the wave-packet formula.  With
   ``phi = sqrt(ratio/eta) conj(Cc)`` and ``dCc/dt = (R/2) g C2 - mu Cc``::

       C2 = 2/(R g) sqrt(eta/ratio) (conj(dphi/dt) + mu conj(phi)),  mu = 1/2 + i dk

2. ``big_d`` forms ``D = dC2/dt + (R/2) g Cc``; it equals ``f C1`` with the
   pump coupling ``f = (i/2) W e^{-i dp t}``.
3. ``pump_from_target`` solves ``D f' + C2 f^3 - D' f = 0``.  In the frame
   ``q = f e^{i dp t}``, ``E = D e^{i dp t}``, ``w = C2 e^{i dp t}`` this is
   a Bernoulli equation; ``u = q^-2`` linearises it and with ``q(0) = E(0)``::

       q = E / sqrt(1 + 2 int_0^t w E dt')

   The radicand is ``C1(t)^2``.  The pump is ``W = |-2i q|``; the residual
   phase of ``-2i q`` is reported, since a physical pump is real.

Real non-negative profiles are turned into targets with the global phase
``-i`` (``phi = -i |phi|``), which is the phase a real resonant pump imprints
on the emitted field.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import Envelope, SystemParams, TimeGrid, validate_params
from .errors import (
    InfeasibleDesignError,
    ParameterError,
    SingularCouplingError,
    UnphysicalTargetError,
)
from .observables import wavepacket
from .solver import solve_ode

G_MIN = 1e-3
PHASE_TOL = 1e-3
RADICAND_FLOOR = 1e-6
TAIL_TOL = 1e-3


class NonRealPumpWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DesignTarget:
    grid: TimeGrid
    shape: np.ndarray = field(repr=False)
    eta_target: float = 0.5
    label: str = ""

    def __post_init__(self):
        s = np.array(self.shape, dtype=complex)
        if s.shape != (self.grid.n,):
            raise ParameterError(f"target shape has {s.size} samples, grid has {self.grid.n}")
        if not 0 < self.eta_target <= 1:
            raise ParameterError(f"eta_target must lie in (0, 1], got {self.eta_target}")
        s.setflags(write=False)
        object.__setattr__(self, "shape", s)

    @property
    def t_snapshot(self) -> float:
        return self.grid.t_end

    def check(self, norm_tol: float = 1e-6, edge_tol: float = 1e-6) -> None:
        dt = self.grid.dt
        norm = np.trapezoid(np.abs(self.shape) ** 2, dx=dt)
        if abs(norm - 1.0) > norm_tol:
            raise ParameterError(f"target shape must have unit L2 norm, got {norm:.9f}")
        d0 = abs(self.shape[1] - self.shape[0]) / dt
        if abs(self.shape[0]) > edge_tol or d0 > edge_tol:
            raise ParameterError(
                "target must vanish smoothly at tau = 0 (emission cannot start before the pump)"
            )


def target_from_profile(profile, grid: TimeGrid, eta_target: float, label: str = "") -> DesignTarget:
    """Normalise a real non-negative profile and attach the ``-i`` phase convention."""
    prof = np.asarray(profile, dtype=float)
    if prof.shape != (grid.n,) or np.any(prof < 0):
        raise ParameterError("profile must be a non-negative array on the target grid")
    norm = np.sqrt(np.trapezoid(prof**2, dx=grid.dt))
    if not norm > 0:
        raise ParameterError("profile is identically zero")
    return DesignTarget(grid, -1j * prof / norm, eta_target, label)


def target_from_envelope(env: Envelope, eta_target: float) -> DesignTarget:
    return target_from_profile(env.samples, env.grid, eta_target, env.label)


def _derivative(y: np.ndarray, dt: float) -> np.ndarray:
    # centred differences inside, second-order one-sided at the ends
    return np.gradient(y, dt, edge_order=2)


def _derivative4(y: np.ndarray, dt: float) -> np.ndarray:
    out = np.gradient(y, dt, edge_order=2)
    out[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * dt)
    return out


def c2_from_target(target: DesignTarget, p: SystemParams, g: Envelope, g_min: float = G_MIN,
                   check: bool = True) -> np.ndarray:
    validate_params(p)
    if check:
        target.check()
    grid = target.grid
    gv = g.at(grid.t)
    if np.any(gv < g_min):
        bad = grid.t[np.argmax(gv < g_min)]
        raise SingularCouplingError(
            f"coupling g(t) falls below g_min={g_min} (first at t={bad:.6g}); cannot emit there"
        )
    if p.rabi_R <= 0:
        raise SingularCouplingError("rabi_R = 0: the cavity cannot emit any target")
    phi = target.shape
    dphi = _derivative(phi, grid.dt)
    scale = 2.0 / (p.rabi_R * gv) * np.sqrt(target.eta_target / p.gamma_rad_ratio)
    c2 = scale * (np.conj(dphi) + p.cavity_rate * np.conj(phi))
    peak = np.max(np.abs(c2))
    if peak > 1.0:
        raise UnphysicalTargetError(
            f"target needs |C2| up to {peak:.3g} > 1; it cannot be reached with probability amplitudes"
        )
    return c2


def _cavity_from_c2(c2, p, gv, dt):
    """``(R/2) int_0^t g C2 e^{-mu (t-t')} dt'`` by the trapezoid recursion."""
    decay = np.exp(-p.cavity_rate * dt)
    h = (0.5 * p.rabi_R * 0.5 * dt) * (gv * c2)
    h_l = h.tolist()
    out = np.zeros(c2.size, complex)
    acc = 0j
    for j in range(1, c2.size):
        acc = decay * (acc + h_l[j - 1]) + h_l[j]
        out[j] = acc
    return out


def big_d(c2, p: SystemParams, g: Envelope, grid: TimeGrid) -> np.ndarray:
    """``D = dC2/dt + (R^2/4) g(t) int_0^t g(t') C2(t') e^{-mu (t-t')} dt'``.

    The convolution runs as a one-pole recursion in O(n); it is the composite
    trapezoid rule rearranged.
    """
    c2 = np.asarray(c2, dtype=complex)
    if c2.shape != (grid.n,):
        raise ParameterError("C2 must be sampled on the design grid")
    gv = g.at(grid.t)
    cav = _cavity_from_c2(c2, p, gv, grid.dt)
    return _derivative(c2, grid.dt) + 0.5 * p.rabi_R * gv * cav


def big_d_direct(c2, p: SystemParams, g: Envelope, grid: TimeGrid) -> np.ndarray:
    """O(n^2) direct trapezoid evaluation of :func:`big_d` (oracle)."""
    c2 = np.asarray(c2, dtype=complex)
    dt, n = grid.dt, grid.n
    gv = g.at(grid.t)
    lag = np.exp(-p.cavity_rate * dt * np.arange(n))
    h = gv * c2
    mem = np.zeros(n, complex)
    for j in range(1, n):
        v = lag[j::-1] * h[: j + 1]
        mem[j] = dt * (v.sum() - 0.5 * (v[0] + v[-1]))
    return _derivative(c2, dt) + 0.25 * p.rabi_R**2 * gv * mem


def _continuous_sqrt(z: np.ndarray) -> np.ndarray:
    r = np.sqrt(z)
    if r.size > 1:
        flip = (r[1:] * np.conj(r[:-1])).real < 0
        sign = np.where(np.cumsum(flip) % 2 == 1, -1.0, 1.0)
        r[1:] *= sign
    return r


@dataclass(frozen=True)
class PumpDesign:
    pump: Envelope
    q: np.ndarray = field(repr=False)       # pump coupling in the dp-rotated frame
    c2: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    radicand: np.ndarray = field(repr=False)
    phase_max: float = 0.0
    cutoff_index: int | None = None
    warnings: tuple = ()


def _cumtrapz(f, dt):
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * dt * (f[1:] + f[:-1]))
    return out


def pump_from_target(target: DesignTarget, p: SystemParams, g: Envelope, g_min: float = G_MIN,
                     radicand_floor: float = RADICAND_FLOOR, tail_tol: float = TAIL_TOL,
                     phase_tol: float = PHASE_TOL) -> PumpDesign:
    """Pump envelope that emits ``target`` with efficiency ``target.eta_target``.

    Once the radicand (the remaining ground-state population) falls below
    ``radicand_floor`` the pump is switched off; this is only accepted when
    less than ``tail_tol`` of the target is still to be emitted, otherwise
    the design is infeasible.
    """
    grid = target.grid
    t, dt = grid.t, grid.dt
    c2 = c2_from_target(target, p, g, g_min)
    d = big_d(c2, p, g, grid)
    rot = np.exp(1j * p.delta_p * t)
    e, w = d * rot, c2 * rot
    rad = 1.0 + 2.0 * _cumtrapz(w * e, dt)

    low = np.nonzero(rad.real <= radicand_floor)[0]
    cutoff = None
    if low.size:
        k = int(low[0])
        tail = np.trapezoid(np.abs(target.shape[k:]) ** 2, dx=dt) if k < grid.n - 1 else 0.0
        if tail > tail_tol:
            raise InfeasibleDesignError(
                f"radicand 1 + 2 int C2 D reaches {rad.real[k]:.3g} at t={t[k]:.6g} with "
                f"{tail:.3g} of the target still to be emitted; eta_target={target.eta_target} "
                f"is not reachable (ratio={p.gamma_rad_ratio})"
            )
        cutoff = k
    q = np.zeros(grid.n, complex)
    stop = grid.n if cutoff is None else cutoff
    q[:stop] = e[:stop] / _continuous_sqrt(rad[:stop])

    omega_c = -2j * q
    amp = np.abs(omega_c)
    peak = amp.max()
    msgs = []
    phase_max = 0.0
    if peak > 0:
        sig = amp > 1e-3 * peak
        phase_max = float(np.max(np.abs(np.angle(omega_c[sig]))))
        if phase_max > phase_tol:
            msg = (f"designed pump is not real: residual phase up to {phase_max:.3g} rad "
                   f"(tolerance {phase_tol}); using |Omega_p|")
            msgs.append(msg)
            warnings.warn(msg, NonRealPumpWarning, stacklevel=2)
    pump = Envelope(grid, amp, f"designed({target.label or 'target'}, eta={target.eta_target})")
    return PumpDesign(pump=pump, q=q, c2=c2, d=d, radicand=rad, phase_max=phase_max,
                      cutoff_index=cutoff, warnings=tuple(msgs))


def pump_coupling_rk4(design: PumpDesign, p: SystemParams, grid: TimeGrid,
                      threshold: float = 1e-8, rel_threshold: float = 1e-4) -> np.ndarray:
    """Integrate ``E q' + w q^3 - E' q = 0`` directly with RK4 (oracle).

    Steps of ``2 dt`` place every RK4 half step on a grid node, so the
    coefficients are exact samples.  Returns ``q`` on the even nodes; odd
    nodes are ``nan``.

    ``E'/E`` is dominated by finite-difference round-off while ``|E|`` is
    tiny, so integration starts once ``|E|`` exceeds both ``threshold`` and
    ``rel_threshold * max|E|``.  Before that ``q = E``, and the start value
    comes from ``E = q (1 + int_0^t q w)`` with ``q = E`` inside the integral.
    """
    t, dt = grid.t, grid.dt
    rot = np.exp(1j * p.delta_p * t)
    e = design.d * rot
    w = design.c2 * rot
    de = _derivative4(e, dt)
    stop = grid.n if design.cutoff_index is None else design.cutoff_index
    out = np.full(grid.n, np.nan + 0j)
    level = max(threshold, rel_threshold * np.max(np.abs(e[:stop]), initial=0.0))
    above = np.nonzero(np.abs(e[:stop]) > level)[0]
    start = int(above[0]) if above.size else stop
    start -= start % 2
    out[:start:2] = e[:start:2]
    if start >= stop - 2:
        return out
    s0 = 1.0 + np.trapezoid(e[: start + 1] * w[: start + 1], dx=dt) if start > 0 else 1.0
    y = complex(e[start] / s0)
    out[start] = y

    def rhs(j, y):
        return (de[j] * y - w[j] * y**3) / e[j]

    h = 2 * dt
    for j in range(start, stop - 2, 2):
        k1 = rhs(j, y)
        k2 = rhs(j + 1, y + 0.5 * h * k1)
        k3 = rhs(j + 1, y + 0.5 * h * k2)
        k4 = rhs(j + 2, y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[j + 2] = y
    return out


@dataclass(frozen=True)
class RoundTripReport:
    design: PumpDesign
    achieved_phi: np.ndarray = field(repr=False)
    achieved_eta: float = 0.0
    l2_error: float = 0.0
    eta_error: float = 0.0

    @property
    def pump(self) -> Envelope:
        return self.design.pump


def normalized_l2_distance(a, b, dx: float) -> float:
    a = np.abs(np.asarray(a))
    b = np.abs(np.asarray(b))
    a = a / np.sqrt(np.trapezoid(a**2, dx=dx))
    b = b / np.sqrt(np.trapezoid(b**2, dx=dx))
    return float(np.sqrt(np.trapezoid((a - b) ** 2, dx=dx)))


def round_trip(target: DesignTarget, p: SystemParams, g: Envelope, **kw) -> RoundTripReport:
    """Design the pump, run it through the forward solver and compare."""
    design = pump_from_target(target, p, g, **kw)
    grid = target.grid
    traj = solve_ode(p, design.pump, g, grid)
    wp = wavepacket(traj, p, grid.t_end)
    l2 = normalized_l2_distance(wp.phi, target.shape, grid.dt)
    return RoundTripReport(design=design, achieved_phi=wp.phi, achieved_eta=wp.eta_T,
                           l2_error=l2, eta_error=abs(wp.eta_T - target.eta_target))
