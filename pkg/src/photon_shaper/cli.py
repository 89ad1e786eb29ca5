"""``photon-shaper`` command-line front end."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import MODES, parse_config
from .errors import PhotonShaperError
from .runner import run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="photon-shaper",
        description="Simulate single-photon emission from a pumped cavity and design pump pulses.",
    )
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, type=Path,
                    help="INI config file, or a manifest.json from an earlier run")
    ap.add_argument("--out", type=Path, default=None, help="output directory (overrides [run] outputs)")
    ap.add_argument("--dt", type=float, default=None, help="time step (overrides [grid] dt)")
    ap.add_argument("--force-coarse", action="store_true", help="allow dt above the refinement guard")
    return ap


def _overrides(args) -> dict:
    ov = {}
    if args.dt is not None:
        ov.setdefault("grid", {})["dt"] = repr(args.dt)
    if args.force_coarse:
        ov.setdefault("grid", {})["force_coarse"] = "true"
    if args.out is not None:
        ov.setdefault("run", {})["outputs"] = str(args.out)
    return ov


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, mode=args.mode, overrides=_overrides(args))
        status = run(cfg)
    except PhotonShaperError as exc:
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return exc.exit_code
    except (ArithmeticError, ValueError) as exc:
        print(json.dumps({"error": "numeric", "type": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    return status


if __name__ == "__main__":
    sys.exit(main())
