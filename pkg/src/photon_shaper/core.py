"""Unit system, parameter set, time grid and sampled envelopes.

All rates and detunings are expressed in units of the cavity linewidth
``Gamma_k`` and all times in ``1/Gamma_k``; ``gamma_total`` is therefore 1 by
construction.  Amplitudes live in the frame rotating with the bare transition
frequencies, so only the detunings survive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CapacityError, DomainError, ParameterError
from .io import write_csv

MAX_SAMPLES = 10**8
# default refinement guard for the solvers
MAX_DT = 0.01


@dataclass(frozen=True)
class SystemParams:
    rabi_R: float
    delta_k: float = 0.0
    delta_p: float = 0.0
    gamma_rad_ratio: float = 0.9
    gamma_total: float = 1.0

    @property
    def gamma_rad(self) -> float:
        return self.gamma_rad_ratio * self.gamma_total

    @property
    def gamma_loss(self) -> float:
        """Unwanted (absorptive) part of the cavity decay rate."""
        return self.gamma_total * (1.0 - self.gamma_rad_ratio)

    @property
    def cavity_pole(self) -> complex:
        """Complex cavity pole in the rotating frame, ``delta_k - i/2``."""
        return complex(self.delta_k, -0.5 * self.gamma_total)

    @property
    def cavity_rate(self) -> complex:
        """Decay constant ``i*delta_k + Gamma_k/2`` of the cavity amplitude."""
        return complex(0.5 * self.gamma_total, self.delta_k)

    def replace(self, **changes) -> "SystemParams":
        d = self.to_dict()
        d.update(changes)
        return SystemParams(**d)

    def to_dict(self) -> dict:
        return {
            "rabi_R": self.rabi_R,
            "delta_k": self.delta_k,
            "delta_p": self.delta_p,
            "gamma_rad_ratio": self.gamma_rad_ratio,
            "gamma_total": self.gamma_total,
        }

    @classmethod
    def from_physical(cls, rabi_R, delta_k, delta_p, gamma_rad, gamma_total):
        """Build a parameter set from rates given in s^-1 (or any common unit)."""
        if not gamma_total > 0:
            raise ParameterError("gamma_total must be positive")
        return cls(
            rabi_R=rabi_R / gamma_total,
            delta_k=delta_k / gamma_total,
            delta_p=delta_p / gamma_total,
            gamma_rad_ratio=gamma_rad / gamma_total,
            gamma_total=1.0,
        )

    def to_physical(self, gamma_total: float) -> dict:
        """Inverse of :meth:`from_physical` for a linewidth ``gamma_total``."""
        return {
            "rabi_R": self.rabi_R * gamma_total,
            "delta_k": self.delta_k * gamma_total,
            "delta_p": self.delta_p * gamma_total,
            "gamma_rad": self.gamma_rad_ratio * gamma_total,
            "gamma_total": gamma_total,
        }


def validate_params(p: SystemParams) -> SystemParams:
    """Return ``p`` unchanged if every field is in range, else raise."""
    for name in ("rabi_R", "delta_k", "delta_p", "gamma_rad_ratio", "gamma_total"):
        v = getattr(p, name)
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ParameterError(f"{name} must be a finite real number, got {v!r}")
    if p.gamma_total != 1.0:
        raise ParameterError(
            f"gamma_total must be exactly 1 (rates are in units of Gamma_k), got {p.gamma_total}"
        )
    if not 0.0 <= p.gamma_rad_ratio <= 1.0:
        raise ParameterError(f"gamma_rad_ratio must lie in [0, 1], got {p.gamma_rad_ratio}")
    if p.rabi_R < 0:
        raise ParameterError(f"rabi_R must be non-negative, got {p.rabi_R}")
    return p


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    dt: float
    n: int

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n) * self.dt

    def refined(self, factor: int = 2) -> "TimeGrid":
        return make_grid(self.t_end, self.dt / factor)


def make_grid(t_end: float, dt: float) -> TimeGrid:
    if not (t_end > 0 and dt > 0) or not (math.isfinite(t_end) and math.isfinite(dt)):
        raise ParameterError(f"t_end and dt must be positive, got t_end={t_end}, dt={dt}")
    ratio = t_end / dt
    if ratio > MAX_SAMPLES:
        raise CapacityError(f"grid with t_end/dt = {ratio:.3g} exceeds {MAX_SAMPLES:.0e} samples")
    steps = round(ratio)
    if abs(steps * dt - t_end) > 1e-9 * max(t_end, 1.0):
        raise ParameterError(f"t_end={t_end} is not an integer multiple of dt={dt}")
    return TimeGrid(t_end=float(t_end), dt=float(dt), n=steps + 1)


@dataclass(frozen=True)
class Envelope:
    grid: TimeGrid
    samples: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size != self.grid.n:
            raise ParameterError(
                f"envelope has {s.size} samples but its grid has {self.grid.n}"
            )
        if not np.all(np.isfinite(s)):
            raise ParameterError("envelope samples must be finite")
        if np.any(s < 0):
            raise ParameterError("envelope samples must be non-negative")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def peak(self) -> float:
        return float(self.samples.max())

    def at(self, times) -> np.ndarray:
        """Vectorised linear interpolation (no domain check)."""
        return np.interp(times, self.grid.t, self.samples)

    def scaled(self, factor: float, label: str | None = None) -> "Envelope":
        return Envelope(self.grid, self.samples * factor, label if label is not None else self.label)


def eval_envelope(e: Envelope, t: float) -> float:
    tol = 1e-12 * max(e.grid.t_end, 1.0)
    if not (-tol <= t <= e.grid.t_end + tol):
        raise DomainError(f"t={t} outside the envelope window [0, {e.grid.t_end}]")
    x = min(max(t / e.grid.dt, 0.0), e.grid.n - 1)
    j = min(int(math.floor(x)), e.grid.n - 2) if e.grid.n > 1 else 0
    frac = x - j
    s = e.samples
    if frac == 0.0 or e.grid.n == 1:
        return float(s[j])
    return float((1.0 - frac) * s[j] + frac * s[j + 1])


def constant_envelope(grid: TimeGrid, value: float = 1.0, label: str = "") -> Envelope:
    return Envelope(grid, np.full(grid.n, float(value)), label or f"constant({value})")


def zero_envelope(grid: TimeGrid) -> Envelope:
    return Envelope(grid, np.zeros(grid.n), "zero")


# --- CSV ---------------------------------------------------------------------------

def fmt(x: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


def write_envelope_csv(e: Envelope, path) -> None:
    write_csv(path, ["t", "value"], [e.grid.t, e.samples])


def read_envelope_csv(path, label: str | None = None) -> Envelope:
    path = Path(path)
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParameterError(f"cannot read envelope CSV {path}: {exc}") from exc
    if data.shape[1] != 2 or data.shape[0] < 2:
        raise ParameterError(f"{path}: expected at least two rows of 't,value'")
    t, v = data[:, 0], data[:, 1]
    dt = t[-1] / (t.size - 1)
    grid = make_grid(t[-1], dt)
    if grid.n != t.size or not np.allclose(t, grid.t, rtol=0, atol=1e-9 * max(t[-1], 1.0)):
        raise ParameterError(f"{path}: time column is not a uniform grid starting at 0")
    return Envelope(grid, v, label or f"csv:{path.name}")
