"""INI-style run configuration with strict, line-numbered validation.

Sections::

    [run]       mode, outputs, figure, snapshot, spectrum, output_stride
    [params]    rabi_R, delta_k, delta_p, gamma_rad_ratio, gamma_total
    [grid]      t_end, dt, force_coarse
    [pump]      family + pulse keys, or csv = PATH
    [coupling]  same as [pump]; defaults to constant 1
    [inverse]   eta_target + pulse keys of the target profile, or csv = PATH
    [spectrum]  points, span
    [sweep]     section.key = v1, v2, ...

A run manifest (``manifest.json``) is also accepted: its ``config`` entry is
the fully resolved configuration of the run that wrote it.
"""
from __future__ import annotations

import configparser
import itertools
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import core, pulses
from .core import SystemParams, TimeGrid
from .errors import CapacityError, ConfigError, PhotonShaperError
from .pulses import PulseSpec

MODES = ("forward", "inverse", "spectrum", "sweep", "figure")
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig7", "fig8")
PRESET_DIR = Path(__file__).with_name("presets")

_PULSE_KEYS = ("family", "amplitude", "center", "width", "centers", "widths", "ramp", "depth", "period", "csv")

SCHEMA = {
    "run": {
        "mode": ("choice", None),
        "outputs": ("str", "out"),
        "figure": ("str", None),
        "snapshot": ("float", None),
        "spectrum": ("bool", False),
        "output_stride": ("int", 1),
    },
    "params": {
        "rabi_R": ("float", None),
        "delta_k": ("float", 0.0),
        "delta_p": ("float", 0.0),
        "gamma_rad_ratio": ("float", 0.9),
        "gamma_total": ("float", 1.0),
    },
    "grid": {
        "t_end": ("float", None),
        "dt": ("float", 1e-3),
        "force_coarse": ("bool", False),
    },
    "pump": {k: ("pulse", None) for k in _PULSE_KEYS},
    "coupling": {k: ("pulse", None) for k in _PULSE_KEYS},
    "inverse": {**{k: ("pulse", None) for k in _PULSE_KEYS}, "eta_target": ("float", None)},
    "spectrum": {"points": ("int", 4001), "span": ("float", 20.0)},
    "sweep": {},
}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SystemParams
    grid: TimeGrid
    force_coarse: bool
    pump: PulseSpec | Path | None
    coupling: PulseSpec | Path
    outputs: Path
    snapshot: float
    spectrum: bool = False
    spectrum_points: int = 4001
    spectrum_span: float = 20.0
    output_stride: int = 1
    target: PulseSpec | Path | None = None
    eta_target: float | None = None
    figure: str | None = None
    sweep: tuple = ()
    # resolved section -> key -> string, the source of truth for manifests
    raw: dict = field(default_factory=dict, repr=False, compare=False)
    source: str = ""

    def resolved(self) -> dict:
        return {s: dict(v) for s, v in self.raw.items()}


def _line_index(text: str) -> dict:
    """Map (section, key) -> 1-based line number."""
    where = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            where[(section, None)] = no
            continue
        m = re.match(r"([^=:]+)[=:]", s)
        if m and section is not None:
            where[(section, m.group(1).strip())] = no
    return where


def _read_raw(path: Path) -> tuple[dict, dict]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror or exc}", path) from exc
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc.msg}", path, exc.lineno) from exc
        raw = doc.get("config", doc) if isinstance(doc, dict) else None
        if not isinstance(raw, dict) or not all(isinstance(v, dict) for v in raw.values()):
            raise ConfigError("JSON config must be a manifest or a mapping of sections", path)
        return {s: {k: str(v) for k, v in sec.items()} for s, sec in raw.items()}, {}
    cp = configparser.ConfigParser(interpolation=None, strict=True, default_section="\0")
    cp.optionxform = str  # keys are case-sensitive (rabi_R)
    try:
        cp.read_string(text, source=str(path))
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", path, exc.lineno) from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key '{exc.option}' in [{exc.section}]", path, exc.lineno) from exc
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any [section]", path, exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if getattr(exc, "errors", None) else None
        raise ConfigError("malformed line", path, lineno) from exc
    raw = {s: dict(cp.items(s)) for s in cp.sections()}
    return raw, _line_index(text)


def _convert(kind, value, what):
    v = value.strip()
    if kind in ("float",):
        return float(v)
    if kind == "int":
        return int(v)
    if kind == "bool":
        low = v.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {v!r}")
    return v


class _Ctx:
    def __init__(self, path, lines):
        self.path = path
        self.lines = lines

    def err(self, msg, section=None, key=None):
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        where = f"[{section}] {key}: " if key else (f"[{section}]: " if section else "")
        return ConfigError(where + msg, self.path, line)


def _check_keys(raw, ctx):
    for section, keys in raw.items():
        if section not in SCHEMA:
            raise ctx.err(f"unknown section [{section}]", section)
        if section == "sweep":
            continue
        for key in keys:
            if key not in SCHEMA[section]:
                raise ctx.err(
                    f"unknown key '{key}' (allowed: {', '.join(SCHEMA[section])})", section, key
                )


def _get(raw, section, key, ctx, required=False):
    kind, default = SCHEMA[section][key]
    sec = raw.get(section, {})
    if key not in sec:
        if required:
            raise ctx.err(f"missing required key '{key}'", section)
        return default
    try:
        return _convert(kind, sec[key], key)
    except ValueError as exc:
        raise ctx.err(f"invalid value {sec[key]!r}: {exc}", section, key) from None


def _pulse(raw, section, ctx, base: Path, required=True, default=None):
    sec = raw.get(section)
    if not sec:
        if required:
            raise ctx.err(f"missing section [{section}]")
        return default
    if "csv" in sec:
        others = set(sec) - {"csv", "eta_target"}
        if others:
            raise ctx.err(f"'csv' cannot be combined with {sorted(others)}", section, "csv")
        p = Path(sec["csv"])
        if not p.is_absolute():
            p = base / p
        if not p.is_file():
            raise ctx.err(f"file not found: {p}", section, "csv")
        return p
    d = {}
    for k, v in sec.items():
        if k in ("eta_target",):
            continue
        try:
            if k in ("centers", "widths"):
                d[k] = tuple(float(x) for x in v.split(",") if x.strip())
            elif k == "family":
                d[k] = v.strip()
            else:
                d[k] = float(v)
        except ValueError:
            raise ctx.err(f"invalid value {v!r}", section, k) from None
    try:
        return pulses.pulse_from_mapping(d)
    except PhotonShaperError as exc:
        raise ctx.err(str(exc), section, "family") from None


def _pulse_key_for(msg: str, sec: dict) -> str | None:
    for k in sec:
        if k in msg:
            return k
    return None


def build_config(raw: dict, path="<config>", lines=None, mode: str | None = None,
                 base: Path | None = None) -> RunConfig:
    """Validate a raw ``{section: {key: str}}`` mapping into a :class:`RunConfig`."""
    path = Path(path) if not isinstance(path, Path) else path
    ctx = _Ctx(path, lines or {})
    base = base if base is not None else path.parent
    raw = {s: dict(v) for s, v in raw.items()}
    _check_keys(raw, ctx)

    run_mode = mode or _get(raw, "run", "mode", ctx) or "forward"
    if run_mode not in MODES:
        raise ctx.err(f"mode must be one of {', '.join(MODES)}, got {run_mode!r}", "run", "mode")

    figure = _get(raw, "run", "figure", ctx)
    if run_mode == "figure":
        if figure not in FIGURES:
            raise ctx.err(f"figure must be one of {', '.join(FIGURES)}, got {figure!r}", "run", "figure")
        if "params" not in raw:
            # a bare figure request: everything else comes from the preset
            preset_raw, preset_lines = _read_raw(PRESET_DIR / f"{figure}.ini")
            merged = {s: dict(v) for s, v in preset_raw.items()}
            for s, v in raw.items():
                merged.setdefault(s, {}).update(v)
            return build_config(merged, PRESET_DIR / f"{figure}.ini", preset_lines, "figure", base)

    # params
    vals = {}
    for key in SCHEMA["params"]:
        vals[key] = _get(raw, "params", key, ctx, required=(key == "rabi_R"))
    params = SystemParams(**vals)
    try:
        core.validate_params(params)
    except PhotonShaperError as exc:
        raise ctx.err(str(exc), "params", _pulse_key_for(str(exc), raw.get("params", {}))) from None

    t_end = _get(raw, "grid", "t_end", ctx, required=True)
    dt = _get(raw, "grid", "dt", ctx)
    force = _get(raw, "grid", "force_coarse", ctx)
    try:
        grid = core.make_grid(t_end, dt)
    except CapacityError:
        raise
    except PhotonShaperError as exc:
        raise ctx.err(str(exc), "grid", "dt" if "dt" in raw.get("grid", {}) else "t_end") from None
    if dt > core.MAX_DT and not force:
        raise ctx.err(f"dt={dt} is coarser than {core.MAX_DT}; set force_coarse = true", "grid", "dt")

    snapshot = _get(raw, "run", "snapshot", ctx)
    if snapshot is None:
        snapshot = grid.t_end
    elif not 0 < snapshot <= grid.t_end:
        raise ctx.err(f"snapshot must lie in (0, {grid.t_end}]", "run", "snapshot")
    stride = _get(raw, "run", "output_stride", ctx)
    if stride < 1:
        raise ctx.err("output_stride must be >= 1", "run", "output_stride")

    pump = _pulse(raw, "pump", ctx, base, required=(run_mode != "inverse"
                                                    and not _sweeps_inverse(raw)))
    coupling = _pulse(raw, "coupling", ctx, base, required=False,
                      default=PulseSpec("constant", amplitude=1.0))
    # render once so family-specific ranges are checked now
    for name, spec in (("pump", pump), ("coupling", coupling)):
        if isinstance(spec, PulseSpec):
            try:
                pulses.render_pulse(spec, core.make_grid(grid.t_end, max(grid.dt, grid.t_end / 1000)))
            except PhotonShaperError as exc:
                raise ctx.err(str(exc), name, _pulse_key_for(str(exc), raw.get(name, {}))) from None

    target = eta_target = None
    if run_mode == "inverse" or "inverse" in raw:
        target = _pulse(raw, "inverse", ctx, base, required=(run_mode == "inverse"))
        eta_target = _get(raw, "inverse", "eta_target", ctx, required=(run_mode == "inverse"))
        if eta_target is not None and not 0 < eta_target <= params.gamma_rad_ratio:
            raise ctx.err(
                f"eta_target must lie in (0, gamma_rad_ratio={params.gamma_rad_ratio}]",
                "inverse", "eta_target",
            )
        if isinstance(target, PulseSpec):
            try:
                pulses.render_pulse(target, grid)
            except PhotonShaperError as exc:
                raise ctx.err(str(exc), "inverse", _pulse_key_for(str(exc), raw["inverse"])) from None

    sweep = _parse_sweep(raw, ctx)
    if run_mode == "sweep" and not sweep:
        raise ctx.err("sweep mode needs a non-empty [sweep] section", "sweep")

    resolved = _resolve(raw, params, grid, force, run_mode, snapshot, stride, figure)
    for name, spec in (("pump", pump), ("coupling", coupling), ("inverse", target)):
        if isinstance(spec, Path):
            resolved[name]["csv"] = str(spec.resolve())
    if "coupling" not in resolved:
        resolved["coupling"] = {"family": "constant", "amplitude": "1.0"}
    return RunConfig(
        mode=run_mode, params=params, grid=grid, force_coarse=force, pump=pump,
        coupling=coupling, outputs=Path(_get(raw, "run", "outputs", ctx)), snapshot=snapshot,
        spectrum=_get(raw, "run", "spectrum", ctx) or run_mode == "spectrum",
        spectrum_points=_get(raw, "spectrum", "points", ctx),
        spectrum_span=_get(raw, "spectrum", "span", ctx),
        output_stride=stride, target=target, eta_target=eta_target, figure=figure,
        sweep=sweep, raw=resolved, source=str(path),
    )


def _sweeps_inverse(raw):
    return "inverse" in raw


def _parse_sweep(raw, ctx):
    out = []
    for key, value in raw.get("sweep", {}).items():
        if "." not in key:
            raise ctx.err("sweep keys must look like section.key", "sweep", key)
        section, name = key.split(".", 1)
        if section not in SCHEMA or section in ("sweep", "run") or name not in SCHEMA[section]:
            raise ctx.err(f"unknown sweep target '{key}'", "sweep", key)
        values = tuple(v.strip() for v in value.split(",") if v.strip())
        if not values:
            raise ctx.err("empty value list", "sweep", key)
        out.append((key, values))
    return tuple(out)


def _resolve(raw, params, grid, force, mode, snapshot, stride, figure):
    res = {s: dict(v) for s, v in raw.items()}
    res["params"] = {k: repr(float(v)) for k, v in params.to_dict().items()}
    res["grid"] = {"t_end": repr(grid.t_end), "dt": repr(grid.dt), "force_coarse": str(force).lower()}
    run = res.setdefault("run", {})
    run["mode"] = mode
    run["snapshot"] = repr(float(snapshot))
    run["output_stride"] = str(stride)
    if figure:
        run["figure"] = figure
    return res


def parse_config(path, mode: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Read and validate a config file.  ``overrides`` maps section -> key ->
    string and takes precedence over the file (used by command-line flags)."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config file not found", path)
    raw, lines = _read_raw(path)
    for section, kv in (overrides or {}).items():
        raw.setdefault(section, {}).update(kv)
    return build_config(raw, path, lines, mode)


def _sort_key(v: str):
    try:
        return (0, float(v), "")
    except ValueError:
        return (1, 0.0, v)


def expand_sweep(cfg: RunConfig, collect_errors: bool = False) -> list[tuple[dict, RunConfig]]:
    """Cartesian expansion of the [sweep] section, ordered lexicographically
    by swept values (numeric values compare numerically).

    With ``collect_errors`` an invalid combination yields its exception in
    place of the config instead of aborting the expansion.
    """
    if not cfg.sweep:
        raise ConfigError("nothing to expand: the [sweep] section is empty", cfg.source)
    keys = [k for k, _ in cfg.sweep]
    lists = [sorted(vals, key=_sort_key) for _, vals in cfg.sweep]
    inner_mode = "inverse" if cfg.target is not None else "forward"
    out = []
    for combo in itertools.product(*lists):
        raw = cfg.resolved()
        raw.pop("sweep", None)
        for key, val in zip(keys, combo):
            section, name = key.split(".", 1)
            raw.setdefault(section, {})[name] = val
        raw["run"]["mode"] = inner_mode
        raw["run"].pop("figure", None)
        try:
            sub = build_config(raw, cfg.source, None, inner_mode, base=Path(cfg.source).parent)
        except PhotonShaperError as exc:
            if not collect_errors:
                raise
            sub = exc
        out.append((dict(zip(keys, combo)), sub))
    return out
