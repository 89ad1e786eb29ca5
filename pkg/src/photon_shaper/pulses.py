"""Named envelope families for the pump ``Omega_p(t)`` and the coupling ``g(t)``.

Families
--------
gaussian         ``A exp(-(t-c)^2 / 2w^2)``
sin2             ``A sin^2(pi (t-c+w) / 2w)`` on ``[c-w, c+w]``, zero outside
double_gaussian  sum of two gaussians (``centers``, ``widths``)
flattop          ``A/4 [1 + tanh((t-c+w)/r)] [1 - tanh((t-c-w)/r)]``
constant         ``A``
oscillating      ``A (1 + m sin(2 pi t / P)) / (1 + m)``

Every family except ``constant`` is rescaled after sampling so that the
largest sample equals ``amplitude`` exactly.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import Envelope, TimeGrid
from .errors import ParameterError

FAMILIES = ("gaussian", "sin2", "double_gaussian", "flattop", "constant", "oscillating")

# keys each family reads; anything else present in a config section is rejected
FAMILY_KEYS = {
    "gaussian": ("amplitude", "center", "width"),
    "sin2": ("amplitude", "center", "width"),
    "double_gaussian": ("amplitude", "centers", "widths"),
    "flattop": ("amplitude", "center", "width", "ramp"),
    "constant": ("amplitude",),
    "oscillating": ("amplitude", "depth", "period"),
}


@dataclass(frozen=True)
class PulseSpec:
    family: str
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0
    centers: tuple = field(default_factory=tuple)
    widths: tuple = field(default_factory=tuple)
    ramp: float = 1.0
    depth: float = 0.0
    period: float = 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        keep = ("family",) + FAMILY_KEYS.get(self.family, ())
        out = {k: d[k] for k in keep}
        for k in ("centers", "widths"):
            if k in out:
                out[k] = list(out[k])
        return out

    @property
    def label(self) -> str:
        d = self.to_dict()
        fam = d.pop("family")
        return fam + "(" + ", ".join(f"{k}={v}" for k, v in d.items()) + ")"


def _check(spec: PulseSpec, t_end: float) -> None:
    if spec.family not in FAMILIES:
        raise ParameterError(f"unknown pulse family {spec.family!r}; choose from {', '.join(FAMILIES)}")
    if not (np.isfinite(spec.amplitude) and spec.amplitude >= 0):
        raise ParameterError(f"amplitude must be >= 0, got {spec.amplitude}")
    fam = spec.family
    if fam in ("gaussian", "sin2", "flattop"):
        if not spec.width > 0:
            raise ParameterError(f"{fam}: width must be > 0, got {spec.width}")
        if not 0 <= spec.center <= t_end:
            raise ParameterError(f"{fam}: center {spec.center} outside [0, {t_end}]")
    if fam == "flattop" and not spec.ramp > 0:
        raise ParameterError(f"flattop: ramp must be > 0, got {spec.ramp}")
    if fam == "double_gaussian":
        if len(spec.centers) != 2 or len(spec.widths) != 2:
            raise ParameterError("double_gaussian needs exactly two centers and two widths")
        if any(not w > 0 for w in spec.widths):
            raise ParameterError(f"double_gaussian: widths must be > 0, got {spec.widths}")
        if any(not 0 <= c <= t_end for c in spec.centers):
            raise ParameterError(f"double_gaussian: centers {spec.centers} outside [0, {t_end}]")
    if fam == "oscillating":
        if not 0 <= spec.depth < 1:
            raise ParameterError(f"oscillating: depth must lie in [0, 1), got {spec.depth}")
        if not spec.period > 0:
            raise ParameterError(f"oscillating: period must be > 0, got {spec.period}")


def _gauss(t, c, w):
    return np.exp(-((t - c) ** 2) / (2.0 * w * w))


def pulse_shape(spec: PulseSpec, t: np.ndarray) -> np.ndarray:
    """Un-normalised family formula evaluated at ``t`` (amplitude applied)."""
    A = spec.amplitude
    fam = spec.family
    if fam == "gaussian":
        return A * _gauss(t, spec.center, spec.width)
    if fam == "sin2":
        c, w = spec.center, spec.width
        inside = np.abs(t - c) < w
        return np.where(inside, A * np.sin(np.pi * (t - c + w) / (2.0 * w)) ** 2, 0.0)
    if fam == "double_gaussian":
        (c1, c2), (w1, w2) = spec.centers, spec.widths
        return A * (_gauss(t, c1, w1) + _gauss(t, c2, w2))
    if fam == "flattop":
        c, w, r = spec.center, spec.width, spec.ramp
        return A * 0.25 * (1.0 + np.tanh((t - c + w) / r)) * (1.0 - np.tanh((t - c - w) / r))
    if fam == "constant":
        return np.full_like(t, A, dtype=float)
    if fam == "oscillating":
        m, P = spec.depth, spec.period
        return A * (1.0 + m * np.sin(2.0 * np.pi * t / P)) / (1.0 + m)
    raise ParameterError(f"unknown pulse family {fam!r}")


def render_pulse(spec: PulseSpec, grid: TimeGrid) -> Envelope:
    _check(spec, grid.t_end)
    s = pulse_shape(spec, grid.t)
    if spec.family != "constant":
        peak = s.max()
        if peak > 0:
            s = s * (spec.amplitude / peak)
    # tanh products can dip to -0.0 or round below zero in the tails
    s = np.maximum(s, 0.0)
    return Envelope(grid, s, spec.label)


def pulse_from_mapping(d: dict) -> PulseSpec:
    """Build a :class:`PulseSpec` from a flat mapping of already-typed values."""
    d = dict(d)
    fam = d.pop("family", None)
    if fam is None:
        raise ParameterError("pulse section needs a 'family' key")
    if fam not in FAMILIES:
        raise ParameterError(f"unknown pulse family {fam!r}; choose from {', '.join(FAMILIES)}")
    kw = {}
    for k, v in d.items():
        if k in ("centers", "widths"):
            kw[k] = tuple(float(x) for x in v)
        else:
            kw[k] = float(v)
    return PulseSpec(family=fam, **kw)
