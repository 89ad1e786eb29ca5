"""Measurable quantities of the outgoing field computed from a trajectory.

Conventions: the field normalisation prefactor of the wave packet is 1, and
the wave packet is indexed by retarded time ``tau = T - z/c`` (``c = 1``), so
``tau`` is the time at which that part of the packet left the cavity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import czt

from .core import SystemParams
from .errors import CoverageError, DomainError, ParameterError, UndefinedShapeError
from .io import write_csv
from .solver import AmplitudeTrajectory, abs2

# exponential growth within one chunk of the wave-packet integral stays below e^{25}
_CHUNK_TIME = 50.0


def efficiency_curve(traj: AmplitudeTrajectory, p: SystemParams, method: str = "identity") -> np.ndarray:
    """One-photon Fock-state efficiency ``eta(t_j)`` on the trajectory grid.

    ``identity`` uses ``ratio * (|Cc|^2 + leaked)``.  ``double_integral``
    evaluates the time-ordered double integral
    ``(R^2/4) ratio [int dt' g C2(t') int^{t'} dt'' g C2*(t'') e^{(i dk - 1/2)(t'-t'')} + c.c.]``
    by direct trapezoid quadrature (O(n^2)); it is kept as an oracle.
    """
    if method == "identity":
        return p.gamma_rad_ratio / p.gamma_total * (abs2(traj.c_cav) + traj.leaked)
    if method != "double_integral":
        raise ParameterError(f"unknown efficiency method {method!r}")
    n, dt = traj.grid.n, traj.grid.dt
    u = traj.g * traj.c2
    uc = np.conj(u)
    lag = np.exp(np.conj(-p.cavity_rate) * dt * np.arange(n))  # e^{(i dk - G/2) k dt}
    inner = np.zeros(n, complex)
    for j in range(1, n):
        v = lag[j::-1] * uc[: j + 1]
        inner[j] = dt * (v.sum() - 0.5 * (v[0] + v[-1]))
    f = u * inner
    outer = np.zeros(n, complex)
    outer[1:] = np.cumsum(0.5 * dt * (f[1:] + f[:-1]))
    return (p.rabi_R**2 / 4.0) * (p.gamma_rad_ratio / p.gamma_total) * 2.0 * outer.real


def _index_of(traj: AmplitudeTrajectory, T: float) -> int:
    dt = traj.grid.dt
    j = int(round(T / dt))
    if T < 0 or j >= traj.grid.n or abs(j * dt - T) > 1e-9 * max(T, 1.0):
        raise DomainError(f"snapshot time T={T} is not a grid point of [0, {traj.grid.t_end}]")
    return j


@dataclass(frozen=True)
class WavePacket:
    tau: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    eta_T: float = 0.0
    t_snapshot: float = 0.0

    @property
    def dtau(self) -> float:
        return float(self.tau[1] - self.tau[0])

    def to_csv(self, path) -> None:
        write_csv(
            path,
            ["tau", "z_over_c", "Re phi", "Im phi", "abs phi", "intensity"],
            [self.tau, self.t_snapshot - self.tau, self.phi.real, self.phi.imag,
             np.abs(self.phi), intensity(self)],
        )


def wavepacket(traj: AmplitudeTrajectory, p: SystemParams, T: float | None = None) -> WavePacket:
    """Spatiotemporal shape of the outgoing packet at snapshot time ``T``.

    Evaluates ``phi(tau) = (R/2) sqrt(ratio/eta(T)) e^{-(1/2 - i dk) tau}
    int_0^tau C2*(t') g(t') e^{(1/2 - i dk) t'} dt'`` by trapezoid quadrature,
    in chunks so the growing exponential never overflows.
    """
    if T is None:
        T = traj.grid.t_end
    jT = _index_of(traj, T)
    eta_T = float(efficiency_curve(traj, p)[jT])
    if not eta_T > 0:
        raise UndefinedShapeError("nothing was emitted (eta(T) = 0); the wave-packet shape is undefined")
    dt = traj.grid.dt
    nu = np.conj(p.cavity_rate)  # 1/2 - i dk
    u = 0.5 * p.rabi_R * np.conj(traj.c2[: jT + 1]) * traj.g[: jT + 1]
    y = np.zeros(jT + 1, complex)
    step = max(1, int(_CHUNK_TIME / dt))
    start, y0 = 0, 0j
    while start < jT:
        stop = min(start + step, jT)
        s = dt * np.arange(stop - start + 1)
        f = u[start: stop + 1] * np.exp(nu * s)
        acc = np.concatenate(([0j], np.cumsum(0.5 * dt * (f[1:] + f[:-1]))))
        y[start: stop + 1] = np.exp(-nu * s) * (y0 + acc)
        y0 = y[stop]
        start = stop
    phi = np.sqrt(p.gamma_rad_ratio / eta_T) * y
    tau = traj.grid.t[: jT + 1]
    return WavePacket(tau=tau, phi=phi, eta_T=eta_T, t_snapshot=float(tau[-1]))


def intensity(wp: WavePacket) -> np.ndarray:
    return wp.eta_T * abs2(wp.phi)


@dataclass(frozen=True)
class SpectralDensity:
    delta: np.ndarray = field(repr=False)
    s: np.ndarray = field(repr=False)

    def integral(self) -> float:
        return float(np.trapezoid(self.s, self.delta))

    def to_csv(self, path) -> None:
        write_csv(path, ["delta", "s"], [self.delta, self.s])


def _fourier(u: np.ndarray, dt: float, delta: np.ndarray) -> np.ndarray:
    """``sum_j w_j u_j exp(i delta t_j)`` with trapezoid weights ``w_j``."""
    w = np.full(u.size, dt)
    w[0] = w[-1] = 0.5 * dt
    x = w * u
    m = delta.size
    if m > 1:
        step = delta[1] - delta[0]
        uniform = np.allclose(np.diff(delta), step, rtol=1e-9, atol=0)
    else:
        uniform, step = True, 0.0
    if uniform and m > 1:
        return czt(x, m=m, w=np.exp(1j * step * dt), a=np.exp(-1j * delta[0] * dt))
    out = np.empty(m, complex)
    t = dt * np.arange(u.size)
    for i in range(0, m, 16):
        d = delta[i: i + 16]
        out[i: i + 16] = np.exp(1j * np.outer(d, t)) @ x
    return out


def spectrum(traj: AmplitudeTrajectory, p: SystemParams, T: float | None = None,
             delta_grid=None, points: int = 4001, span: float = 20.0) -> SpectralDensity:
    """Spectral density ``|F(delta, T)|^2`` of the outgoing excitation.

    ``s = ratio Gamma R^2 / (8 pi) |int_0^T g C2 e^{i delta t} dt|^2 / ((delta - dk)^2 + Gamma^2/4)``.
    The constant makes ``int s d delta`` equal ``eta(T)`` (Parseval).
    """
    if T is None:
        T = traj.grid.t_end
    jT = _index_of(traj, T)
    if delta_grid is None:
        delta_grid = np.linspace(p.delta_k - span, p.delta_k + span, points)
    delta = np.asarray(delta_grid, dtype=float)
    need_lo, need_hi = p.delta_k - 20.0 * p.gamma_total, p.delta_k + 20.0 * p.gamma_total
    tol = 1e-9 * max(1.0, abs(need_lo), abs(need_hi))
    if delta.ndim != 1 or delta.size < 2 or np.any(np.diff(delta) <= 0):
        raise CoverageError("delta grid must be a strictly ascending 1-D array")
    if delta[0] > need_lo + tol or delta[-1] < need_hi - tol:
        raise CoverageError(
            f"delta grid [{delta[0]}, {delta[-1]}] must span [{need_lo}, {need_hi}]"
        )
    u = traj.g[: jT + 1] * traj.c2[: jT + 1]
    amp = _fourier(u, traj.grid.dt, delta)
    G = p.gamma_total
    pref = p.gamma_rad_ratio * G * p.rabi_R**2 / (8.0 * np.pi)
    s = pref * abs2(amp) / ((delta - p.delta_k) ** 2 + 0.25 * G * G)
    return SpectralDensity(delta=delta, s=s)


def wigner_mode1(eta, alpha_re, alpha_im):
    """Wigner function of the excited mode: vacuum/one-photon mixture.

    ``W(alpha) = (1-eta) (2/pi) e^{-2|alpha|^2} + eta (2/pi)(4|alpha|^2 - 1) e^{-2|alpha|^2}``.
    Broadcasts over array arguments.
    """
    eta_arr = np.asarray(eta, dtype=float)
    if np.any(~np.isfinite(eta_arr)) or np.any(eta_arr < 0) or np.any(eta_arr > 1):
        raise ParameterError(f"eta must lie in [0, 1], got {eta}")
    r2 = np.asarray(alpha_re, float) ** 2 + np.asarray(alpha_im, float) ** 2
    gauss = (2.0 / np.pi) * np.exp(-2.0 * r2)
    w = (1.0 - eta_arr) * gauss + eta_arr * (4.0 * r2 - 1.0) * gauss
    return float(w) if np.ndim(w) == 0 else w
