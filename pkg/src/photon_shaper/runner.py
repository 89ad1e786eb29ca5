"""Experiment orchestration: single runs, sweeps and figure datasets."""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, expand_sweep
from .core import Envelope, TimeGrid, read_envelope_csv
from .errors import PhotonShaperError, UndefinedShapeError
from .inverse import normalized_l2_distance, pump_from_target, target_from_envelope
from .io import atomic_write_json, atomic_write_text, write_csv
from .observables import efficiency_curve, spectrum, wavepacket
from .pulses import PulseSpec, render_pulse
from .solver import solve_ode

THREADS_ENV = "PHOTON_SHAPER_THREADS"


def envelope_for(spec, grid: TimeGrid) -> Envelope:
    """Resolve a pulse spec or CSV path to an envelope covering ``grid``.

    Pulse families are sampled on the half-step grid so the RK4 stage values
    are exact rather than interpolated.
    """
    if isinstance(spec, PulseSpec):
        return render_pulse(spec, grid.refined(2))
    return read_envelope_csv(spec)


def _nodes(env: Envelope, grid: TimeGrid) -> np.ndarray:
    return env.at(grid.t)


def _stride_cols(cols, stride):
    return [np.asarray(c)[::stride] for c in cols]


def _write_trajectory(traj, path, stride):
    write_csv(
        path,
        ["t", "Re C1", "Im C1", "Re C2", "Im C2", "Re Cc", "Im Cc", "leaked"],
        _stride_cols([traj.t, traj.c1.real, traj.c1.imag, traj.c2.real, traj.c2.imag,
                      traj.c_cav.real, traj.c_cav.imag, traj.leaked], stride),
    )


def _write_wavepacket(wp, path, stride):
    write_csv(
        path,
        ["tau", "z_over_c", "Re phi", "Im phi", "abs phi", "intensity"],
        _stride_cols([wp.tau, wp.t_snapshot - wp.tau, wp.phi.real, wp.phi.imag,
                      np.abs(wp.phi), wp.eta_T * np.abs(wp.phi) ** 2], stride),
    )


def _write_env(grid, values, path, stride):
    write_csv(path, ["t", "value"], _stride_cols([grid.t, values], stride))


def _two_peaks(profile: np.ndarray):
    """Indices splitting a two-humped profile at the minimum between its two
    largest local maxima, or None for a single hump."""
    a = np.abs(profile)
    inner = np.nonzero((a[1:-1] > a[:-2]) & (a[1:-1] >= a[2:]))[0] + 1
    if inner.size < 2:
        return None
    top = np.sort(inner[np.argsort(a[inner])[-2:]])
    return top[0] + int(np.argmin(a[top[0]: top[1] + 1]))


def _forward(cfg: RunConfig, out: Path | None):
    grid = cfg.grid
    pump = envelope_for(cfg.pump, grid)
    g = envelope_for(cfg.coupling, grid)
    traj = solve_ode(cfg.params, pump, g, grid, force_coarse=cfg.force_coarse)
    eta = efficiency_curve(traj, cfg.params)
    j = int(round(cfg.snapshot / grid.dt))
    summary = {"eta_T": float(eta[j]), "eta_max": float(eta.max()), "peak_abs_phi": None,
               "norm_drift": float(np.max(np.abs(traj.norm - 1.0)))}
    files = []
    wp = None
    try:
        wp = wavepacket(traj, cfg.params, grid.t[j])
        summary["peak_abs_phi"] = float(np.abs(wp.phi).max())
    except UndefinedShapeError:
        summary["note"] = "eta(T) = 0: nothing emitted, no wave packet written"
    if out is not None:
        s = cfg.output_stride
        _write_trajectory(traj, out / "trajectory.csv", s)
        _write_env(grid, _nodes(pump, grid), out / "pump.csv", s)
        _write_env(grid, _nodes(g, grid), out / "coupling.csv", s)
        files += ["trajectory.csv", "pump.csv", "coupling.csv"]
        if wp is not None:
            _write_wavepacket(wp, out / "wavepacket.csv", s)
            files.append("wavepacket.csv")
        if cfg.spectrum:
            sd = spectrum(traj, cfg.params, grid.t[j], points=cfg.spectrum_points,
                          span=cfg.spectrum_span)
            sd.to_csv(out / "spectrum.csv")
            summary["eta_spectral"] = sd.integral()
            files.append("spectrum.csv")
    return summary, files


def _target(cfg: RunConfig):
    grid = cfg.grid
    if isinstance(cfg.target, PulseSpec):
        env = render_pulse(cfg.target, grid)
    else:
        env = read_envelope_csv(cfg.target)
        if env.grid.n != grid.n or env.grid.dt != grid.dt:
            env = Envelope(grid, np.maximum(env.at(grid.t), 0.0), env.label)
    return target_from_envelope(env, cfg.eta_target)


def _inverse(cfg: RunConfig, out: Path | None):
    grid, p = cfg.grid, cfg.params
    g = envelope_for(cfg.coupling, grid)
    target = _target(cfg)
    target.check()
    design = pump_from_target(target, p, g)
    traj = solve_ode(p, design.pump, g, grid, force_coarse=cfg.force_coarse)
    wp = wavepacket(traj, p, grid.t_end)
    l2 = normalized_l2_distance(wp.phi, target.shape, grid.dt)
    summary = {
        "eta_T": wp.eta_T, "peak_abs_phi": float(np.abs(wp.phi).max()),
        "eta_target": cfg.eta_target, "achieved_eta": wp.eta_T,
        "l2_error": l2, "phase_max": design.phase_max,
        "pump_peak": float(design.pump.peak),
    }
    split = _two_peaks(target.shape)
    if split is not None:
        w = design.pump.samples
        summary["pump_peak1"] = float(w[:split].max())
        summary["pump_peak2"] = float(w[split:].max())
        summary["peak2_over_peak1"] = summary["pump_peak2"] / summary["pump_peak1"]
    files = []
    if out is not None:
        s = cfg.output_stride
        report = {
            "params": cfg.params.to_dict(),
            "target_spec": (cfg.target.to_dict() if isinstance(cfg.target, PulseSpec)
                            else {"csv": str(cfg.target)}),
            "cutoff_time": None if design.cutoff_index is None else float(grid.t[design.cutoff_index]),
            "warnings": list(design.warnings),
            **{k: v for k, v in summary.items() if k not in ("eta_T", "peak_abs_phi")},
        }
        atomic_write_json(out / "design_report.json", report)
        _write_trajectory(traj, out / "trajectory.csv", s)
        _write_wavepacket(wp, out / "wavepacket.csv", s)
        _write_env(grid, design.pump.samples, out / "pump.csv", s)
        _write_env(grid, _nodes(g, grid), out / "coupling.csv", s)
        write_csv(out / "target.csv", ["tau", "Re phi", "Im phi"],
                  _stride_cols([grid.t, target.shape.real, target.shape.imag], s))
        files += ["design_report.json", "trajectory.csv", "wavepacket.csv", "pump.csv",
                  "coupling.csv", "target.csv"]
        if cfg.spectrum:
            sd = spectrum(traj, p, points=cfg.spectrum_points, span=cfg.spectrum_span)
            sd.to_csv(out / "spectrum.csv")
            files.append("spectrum.csv")
    return summary, files


def _manifest(cfg, summary, files, wall):
    return {
        "tool": "photon-shaper",
        "version": __version__,
        "mode": cfg.mode,
        "config": cfg.resolved(),
        "wall_time_s": wall,
        "summary": summary,
        "files": files,
    }


def run_single(cfg: RunConfig, out: Path | None = None) -> dict:
    """Run one forward/inverse/spectrum config; write its artifacts to ``out``."""
    t0 = time.perf_counter()
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    if cfg.mode == "inverse":
        summary, files = _inverse(cfg, out)
    else:
        summary, files = _forward(cfg, out)
    wall = time.perf_counter() - t0
    if out is not None:
        atomic_write_json(out / "manifest.json", _manifest(cfg, summary, files, wall))
    return {"summary": summary, "files": files, "wall_time_s": wall}


def _row_job(args):
    cfg, out = args
    t0 = time.perf_counter()
    if isinstance(cfg, PhotonShaperError):
        return {"status": "error", "error": f"{type(cfg).__name__}: {cfg}", "summary": {},
                "wall_time_s": 0.0}
    try:
        res = run_single(cfg, out)
        return {"status": "ok", "error": "", "summary": res["summary"],
                "wall_time_s": time.perf_counter() - t0}
    except PhotonShaperError as exc:
        return {"status": "error", "error": f"{type(exc).__name__}: {exc}", "summary": {},
                "wall_time_s": time.perf_counter() - t0}


def _workers(n_jobs: int) -> int:
    raw = os.environ.get(THREADS_ENV)
    cap = os.cpu_count() or 1
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            cap = 1
    return max(1, min(cap, n_jobs))


def _map_jobs(jobs):
    n = _workers(len(jobs))
    if n == 1:
        return [_row_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_row_job, jobs))


_SUMMARY_COLUMNS = ("eta_T", "peak_abs_phi", "achieved_eta", "l2_error", "peak2_over_peak1")


def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _table(keys, combos, results) -> str:
    cols = [c for c in _SUMMARY_COLUMNS if any(c in r["summary"] for r in results)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(keys) + cols + ["status", "error"])
    for combo, r in zip(combos, results):
        w.writerow([combo[k] for k in keys] + [_fmt_cell(r["summary"].get(c)) for c in cols]
                   + [r["status"], r["error"]])
    return buf.getvalue()


def run_sweep(cfg: RunConfig, out: Path) -> list[dict]:
    """Aggregate sweep: one CSV row per expanded config, no per-run files.

    Wall times go to ``sweep_manifest.json`` so ``sweep.csv`` is bit-identical
    across repeated runs.
    """
    t0 = time.perf_counter()
    expanded = expand_sweep(cfg, collect_errors=True)
    keys = [k for k, _ in cfg.sweep]
    combos = [c for c, _ in expanded]
    results = _map_jobs([(sub, None) for _, sub in expanded])
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "sweep.csv", _table(keys, combos, results))
    atomic_write_json(out / "sweep_manifest.json", {
        "tool": "photon-shaper", "version": __version__, "mode": "sweep",
        "config": cfg.resolved(), "wall_time_s": time.perf_counter() - t0,
        "rows": [{"values": c, "status": r["status"], "error": r["error"],
                  "wall_time_s": r["wall_time_s"], "summary": r["summary"]}
                 for c, r in zip(combos, results)],
        "files": ["sweep.csv"],
    })
    return [dict(values=c, **r) for c, r in zip(combos, results)]


def _run_dir_name(i, combo):
    parts = [f"{k.split('.', 1)[1]}={v}" for k, v in combo.items()]
    safe = "_".join(parts).replace("/", "-").replace(" ", "")
    return f"run{i:02d}_{safe}"


def run_figure(cfg: RunConfig, out: Path) -> list[dict]:
    """Figure dataset: every preset run gets its own directory of artifacts
    plus a ``summary.csv`` table across runs."""
    t0 = time.perf_counter()
    expanded = expand_sweep(cfg, collect_errors=True)
    keys = [k for k, _ in cfg.sweep]
    combos = [c for c, _ in expanded]
    dirs = [out / _run_dir_name(i, c) for i, c in enumerate(combos)]
    results = _map_jobs([(sub, d) for (_, sub), d in zip(expanded, dirs)])
    out.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "summary.csv", _table(keys, combos, results))
    atomic_write_json(out / "figure_manifest.json", {
        "tool": "photon-shaper", "version": __version__, "mode": "figure",
        "figure": cfg.figure, "config": cfg.resolved(),
        "wall_time_s": time.perf_counter() - t0,
        "runs": [d.name for d in dirs], "files": ["summary.csv"],
    })
    return [dict(values=c, directory=str(d), **r) for c, d, r in zip(combos, dirs, results)]


def run(cfg: RunConfig, out: Path | None = None) -> int:
    """Dispatch on ``cfg.mode``; returns the process exit status."""
    out = Path(out) if out is not None else cfg.outputs
    if cfg.mode == "sweep":
        run_sweep(cfg, out)
        return 0
    if cfg.mode == "figure":
        rows = run_figure(cfg, out)
        return 0 if all(r["status"] == "ok" for r in rows) else 3
    run_single(cfg, out)
    return 0


__all__ = ["run", "run_single", "run_sweep", "run_figure", "envelope_for"]
