"""``qlm`` command line: analyze, collar, sweep, selftest.

Exit codes: 0 success, 1 I/O or parse error, 2 admissibility failure,
3 scalar-curvature floor breached (collar only).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional

from .collar import (
    CollarMetric,
    R_TOL,
    assemble_collar,
    limit_study,
    scalar_curvature_field,
    slice_report,
)
from .config import ConfigError, RunConfig, load_run_config, load_sweep_spec
from .errors import AdmissibilityError, BracketError, EmbeddingError
from .mass_bounds import SCHEMA_VERSION, build_report
from .metric_paths import TraceFreePath
from .sweep import run_sweep

EXIT_OK, EXIT_IO, EXIT_ADMISSIBILITY, EXIT_BREACH = 0, 1, 2, 3


def _threads(arg: Optional[int]) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("QLM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _parse_grid(s: str) -> tuple[int, int]:
    try:
        a, b = s.lower().split("x")
        n_t, n_x = int(a), int(b)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("grid must look like 101x257") from exc
    if n_t < 2 or n_x < 3:
        raise argparse.ArgumentTypeError("grid too small")
    return n_t, n_x


def _positive_float(s: str) -> float:
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError("must be positive")
    return v


def write_atomic(text: str, out: Optional[str]) -> None:
    """Write to ``out`` via a temporary file and rename, or to stdout."""
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _fail(code: int, reason: str, message: str) -> int:
    sys.stderr.write(_dump({"schema_version": SCHEMA_VERSION, "status": "error", "reason": reason, "message": message}))
    return code


def _apply_grid(cfg: RunConfig, grid) -> RunConfig:
    if grid is None:
        return cfg
    from dataclasses import replace

    return replace(cfg, n_t=grid[0], n_x=grid[1])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg = _apply_grid(load_run_config(args.config), args.grid)
    rep = build_report(
        cfg.metric, cfg.H, cfg.pipeline, cfg.kappa, cfg.horizon, cfg.family,
        cfg.n_t, cfg.n_x, _threads(args.threads), cfg.brown_york,
    )
    d = rep.to_dict()
    d["status"] = "ok"
    write_atomic(_dump(d), args.out)
    return EXIT_OK


def cmd_collar(args) -> int:
    cfg = _apply_grid(load_run_config(args.config), args.grid)
    tol = args.tol if args.tol is not None else R_TOL
    if cfg.m is None and cfg.m_sequence is None:
        raise ConfigError("collar needs collar.m or collar.m_sequence")
    r_o = cfg.metric.r_o
    tau = cfg.H.tau(r_o)
    out: dict = {
        "schema_version": SCHEMA_VERSION,
        "pipeline": cfg.pipeline,
        "r_o": {"value": r_o, "units": "length"},
        "tau": tau,
        "kappa": {"value": cfg.kappa, "units": "length^-1"},
        "settings": {"n_t": cfg.n_t, "n_x": cfg.n_x, "R_tol": tol},
    }
    code = EXIT_OK
    if cfg.m is not None:
        path = TraceFreePath(cfg.metric, n_t=cfg.n_t, n_x=cfg.n_x)
        build = assemble_collar(cfg.metric, cfg.H, cfg.m, cfg.kappa, path, None, cfg.n_t, cfg.n_x)
        ch = build.choice
        A = cfg.A if cfg.A is not None else build.collar.A * (cfg.A_scale or 1.0)
        collar = build.collar
        if A != collar.A:
            collar = assemble_collar(cfg.metric, cfg.H, cfg.m, cfg.kappa, path, A, cfg.n_t, cfg.n_x).collar
        fields = [scalar_curvature_field(collar), scalar_curvature_field(collar.refined())]
        ok = all(f.minimum >= f.floor - tol for f in fields)
        slices = [slice_report(collar, i / (cfg.slices - 1)) for i in range(cfg.slices)]
        out["collar"] = {
            "m": {"value": cfg.m, "units": "length"},
            "k": collar.k,
            "alpha": build.constants.alpha,
            "beta": build.constants.beta,
            "A_o": {"value": ch.A, "units": "length"},
            "A_used": {"value": collar.A, "units": "length"},
            "A_branch": ch.branch,
            "A_residual": ch.residual,
            "A_bracket": {"lower": ch.lower, "upper": ch.upper if math.isfinite(ch.upper) else None,
                          "units": "length", "satisfied": ch.in_bracket},
            "R_certificate": {
                "floor": {"value": collar.floor, "units": "length^-2"},
                "grids": [
                    {"n_t": c.n_t, "n_x": c.n_x, "min_R": f.minimum, "argmin_t": f.argmin[0],
                     "argmin_x": f.argmin[1], "interior_min_R": f.interior_minimum}
                    for c, f in zip((collar, collar.refined()), fields)
                ],
                "certified": ok,
            },
            "slices": [
                {"t": s.t, "u": s.u, "area": s.area, "mean_curvature": s.mean_curvature,
                 "hawking_mass": s.hawking_mass, "hawking_mass_formula": s.hawking_mass_formula,
                 "min_R": s.min_R}
                for s in slices
            ],
            "slice_units": {"u": "length", "area": "length^2", "mean_curvature": "length^-1",
                            "hawking_mass": "length", "min_R": "length^-2"},
        }
        if not ok:
            code = EXIT_BREACH
    if cfg.m_sequence is not None:
        path = TraceFreePath(cfg.metric, n_t=cfg.n_t, n_x=cfg.n_x)
        from .metric_paths import path_constants

        ls = limit_study(path_constants(path), tau, r_o, cfg.kappa, cfg.m_sequence)
        out["limit_study"] = {
            "u_limit": ls.u_limit,
            "A_limit": ls.A_limit,
            "mass_limit": ls.mass_limit,
            "rows": [r.__dict__ for r in ls.rows],
            "monotone_dev_u": ls.monotone("dev_u"),
        }
    out["status"] = "ok" if code == EXIT_OK else "breach"
    write_atomic(_dump(out), args.out)
    return code


def cmd_sweep(args) -> int:
    spec = load_sweep_spec(args.spec)
    write_atomic(run_sweep(spec, _threads(args.threads)), args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    import pytest

    root = Path(__file__).resolve().parents[2]
    target = root / "tests" / "test_acceptance.py"
    if not target.exists():
        return _fail(EXIT_IO, "missing_suite", f"acceptance suite not found at {target}")
    return int(pytest.main([str(target), "-q", "-s"]))


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qlm", description="Quasi-local mass bounds for CMC spheres.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--grid", type=_parse_grid, help="NTxNX grid, e.g. 101x257")
        sp.add_argument("--tol", type=_positive_float, help="scalar curvature floor tolerance")
        sp.add_argument("--threads", type=int, help="worker threads (env QLM_THREADS)")

    a = sub.add_parser("analyze", help="mass bounds for one surface")
    a.add_argument("config")
    common(a)
    a.set_defaults(func=cmd_analyze)
    c = sub.add_parser("collar", help="collar verification report")
    c.add_argument("config")
    common(c)
    c.set_defaults(func=cmd_collar)
    s = sub.add_parser("sweep", help="CSV sweep of the bound formulas")
    s.add_argument("spec")
    common(s)
    s.set_defaults(func=cmd_sweep)
    t = sub.add_parser("selftest", help="run the acceptance suite")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdmissibilityError as exc:
        return _fail(EXIT_ADMISSIBILITY, exc.reason, str(exc))
    except (ConfigError, OSError) as exc:
        return _fail(EXIT_IO, "io_or_parse", str(exc))
    except (EmbeddingError, BracketError, ValueError) as exc:
        return _fail(EXIT_IO, "invalid_input", str(exc))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
