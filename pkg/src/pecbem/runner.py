"""Experiment runner: orchestrates meshes, sweeps, and report files.

Outputs per run:
    results.csv          deterministic table (no timing column)
    residuals/<row>.csv  per-solve residual histories
    manifest.json        config echo, code version, seeds, wall times
"""

import json
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .constants import wavenumber_from_frequency
from .errors import MeshError
from .mesh import SurfaceMesh, generate_cube_mesh
from .offio import read_off
from .refine import dyadic_refine
from .spectral import (SweepRow, build_context, frequency_sweep,
                       refinement_sweep, resonance_sweep, rows_to_csv,
                       sweep_context_rows)


def bundled_mesh_path(name: str) -> Path:
    """Path of a bundled OFF fixture (e.g. 'sphere_unstructured_124.off')."""
    root = resources.files("pecbem").joinpath("data")
    p = Path(str(root.joinpath(name)))
    if not p.exists():
        raise FileNotFoundError(f"no bundled mesh {name!r}")
    return p


def load_geometry(cfg: ExperimentConfig) -> SurfaceMesh:
    if cfg.geometry == "cube":
        return generate_cube_mesh(cfg.side, cfg.n)
    return read_off(Path(cfg.off_path).read_bytes())


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> int:
    """Execute the configured experiment.

    Returns the process exit code: 0 on full success, 2 when some rows failed
    numerically (recorded in the CSV with converged=false)."""
    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "residuals").mkdir(exist_ok=True)

    t_start = time.perf_counter()
    mesh = load_geometry(cfg)
    geometry_name = cfg.geometry if cfg.geometry == "cube" else Path(cfg.off_path).stem

    hierarchy = dyadic_refine(mesh, cfg.refine_j) if cfg.refine_j > 0 else None

    common = dict(tol=cfg.tol, alpha=cfg.alpha, dphi=cfg.dphi, seed=cfg.seed,
                  dense_cap=cfg.dense_cap, geometry=geometry_name)
    if cfg.experiment == "sweep-refine":
        rows = refinement_sweep(mesh, cfg.refine_levels, cfg.frequencies_hz[0],
                                cfg.schemes, **common)
    elif cfg.experiment == "sweep-freq":
        rows = frequency_sweep(mesh, cfg.frequencies_hz, cfg.schemes,
                               hierarchy=hierarchy, **common)
    elif cfg.experiment == "sweep-resonance":
        rows = resonance_sweep(mesh, tuple(cfg.resonance_window),
                               cfg.resonance_steps, schemes=tuple(cfg.schemes),
                               hierarchy=hierarchy, **common)
    else:  # single solve per frequency
        rows = []
        for f in cfg.frequencies_hz:
            ctx = build_context(mesh=mesh if hierarchy is None else None,
                                hierarchy=hierarchy, f_hz=f, alpha=cfg.alpha)
            rows.extend(sweep_context_rows(ctx, cfg.schemes, geometry_name,
                                           tol=cfg.tol, dphi=cfg.dphi,
                                           seed=cfg.seed, dense_cap=cfg.dense_cap))

    # deterministic results table: timing lives in the manifest only
    (out / "results.csv").write_text(rows_to_csv(rows, with_wall=False))

    from .matio import residuals_csv
    wall_times = []
    for i, row in enumerate(rows):
        (out / "residuals" / f"{i}.csv").write_text(residuals_csv(row.residuals))
        wall_times.append({"row": i, "scheme": row.scheme, "f_hz": row.f_hz,
                           "wall_s": round(row.wall_s, 6)})

    from .config import serialize_config
    manifest = {
        "code_version": __version__,
        "config": serialize_config(cfg),
        "seed": cfg.seed,
        "geometry": geometry_name,
        "rows": len(rows),
        "wall_times_s": wall_times,
        "total_wall_s": round(time.perf_counter() - t_start, 6),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    failures = [r for r in rows if not r.converged]
    return 2 if failures else 0
