"""Command-line front end.

Exit codes: 0 success, 2 partial row failures, 64 usage, 65 data error,
70 internal numerical failure.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

EX_OK = 0
EX_PARTIAL = 2
EX_USAGE = 64
EX_DATAERR = 65
EX_SOFTWARE = 70


def _apply_thread_cap():
    cap = os.environ.get("CFIE_THREADS")
    if cap:
        try:
            import numba
            numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))
        except (ValueError, ImportError):
            pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="pecbem",
                description="Boundary-element workbench for PEC scattering")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = p.add_subparsers(dest="command", required=True)

    def add_geometry(sp):
        sp.add_argument("geometry", choices=["cube", "off"])
        sp.add_argument("--side", type=float, default=1.0)
        sp.add_argument("--n", type=int, default=1)
        sp.add_argument("--off-path", type=str, default=None)
        sp.add_argument("--refine-j", type=int, default=0)

    sp = sub.add_parser("mesh-info", help="print mesh statistics as a CSV row")
    add_geometry(sp)

    sp = sub.add_parser("assemble", help="assemble system matrices to disk")
    add_geometry(sp)
    sp.add_argument("--f", type=float, required=True, help="frequency in Hz")
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--out", type=str, default="out")

    sp = sub.add_parser("solve", help="solve one scattering problem")
    add_geometry(sp)
    sp.add_argument("--f", type=float, required=True)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.add_argument("--scheme", type=str, default="cfie:projector")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=str, default="out")

    sp = sub.add_parser("sweep-refine", help="refinement sweep at fixed frequency")
    add_geometry(sp)
    sp.add_argument("--f", type=float, required=True)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--schemes", type=str, default="cfie:none,cfie:projector")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--out", type=str, default="out")

    sp = sub.add_parser("sweep-freq", help="frequency sweep")
    add_geometry(sp)
    sp.add_argument("--f-list", type=str, required=True,
                    help="comma-separated frequencies in Hz")
    sp.add_argument("--schemes", type=str, default="efie:none,cfie:projector")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--out", type=str, default="out")

    sp = sub.add_parser("sweep-resonance", help="scan across a cavity resonance")
    add_geometry(sp)
    sp.add_argument("--window", type=str, required=True, help="f0,f1 in Hz")
    sp.add_argument("--steps", type=int, default=41)
    sp.add_argument("--schemes", type=str,
                    default="efie:none,cfie:none,cfie:projector")
    sp.add_argument("--out", type=str, default="out")

    sp = sub.add_parser("run", help="run an experiment config file")
    sp.add_argument("--config", type=str, required=True)
    sp.add_argument("--out", type=str, default=None)
    return p


def _geometry_mesh(args):
    from .errors import MeshError
    from .mesh import generate_cube_mesh
    from .offio import read_off
    if args.geometry == "cube":
        return generate_cube_mesh(args.side, args.n)
    if not args.off_path:
        raise MeshError("geometry 'off' requires --off-path")
    return read_off(Path(args.off_path).read_bytes())


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = _build_parser()
    args = parser.parse_args(argv)
    quiet = args.quiet

    from .errors import ConvergenceError, MeshError, OffParseError

    def info(msg):
        if not quiet:
            print(msg)

    try:
        if args.command == "mesh-info":
            from .mesh import MeshStats, build_topology, mesh_statistics
            from .refine import dyadic_refine
            mesh = _geometry_mesh(args)
            if args.refine_j > 0:
                mesh = dyadic_refine(mesh, args.refine_j).fine
            stats = mesh_statistics(mesh)
            print(MeshStats.CSV_HEADER)
            print(stats.as_csv_row())
            return EX_OK

        if args.command == "assemble":
            from .constants import wavenumber_from_frequency
            from .matio import write_dense
            from .mesh import build_topology
            from .refine import dyadic_refine
            from .assembly import assemble_efie_mfie, assemble_gram, combine_cfie, efie_matrix
            from .basis import rwg_space
            mesh = _geometry_mesh(args)
            if args.refine_j > 0:
                mesh = dyadic_refine(mesh, args.refine_j).fine
            basis = rwg_space(build_topology(mesh))
            k = wavenumber_from_frequency(args.f)
            za, zphi, zm = assemble_efie_mfie(basis, k)
            ze = efie_matrix(za, zphi)
            zc = combine_cfie(ze, zm, args.alpha)
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for name, m in [("Z_A", za), ("Z_Phi", zphi), ("Z_E", ze),
                            ("Z_M", zm), ("Z_C", zc), ("G_ff", assemble_gram(basis))]:
                write_dense(out / f"{name.lower()}.bin", m.values)
            info(f"wrote 6 matrices (N={basis.size}) to {out}")
            return EX_OK

        if args.command == "solve":
            from .spectral import build_context, make_scheme_operator, parse_scheme
            from .assembly import PlaneWave, plane_wave_rhs
            from .refine import dyadic_refine
            mesh = _geometry_mesh(args)
            hier = dyadic_refine(mesh, args.refine_j) if args.refine_j > 0 else None
            ctx = build_context(mesh=None if hier else mesh, hierarchy=hier,
                                f_hz=args.f, alpha=args.alpha)
            parse_scheme(args.scheme)
            wave = PlaneWave(direction=np.array([0.0, 0.0, 1.0]),
                             polarization=np.array([1.0, 0.0, 0.0]),
                             amplitude=1.0, k=ctx.k)
            formulation = args.scheme.split(":")[0]
            if formulation == "efie":
                rhs = plane_wave_rhs(ctx.basis, wave, 1.0, allow_endpoints=True)
            elif formulation == "mfie":
                rhs = ctx.eta * plane_wave_rhs(ctx.basis, wave, 0.0, allow_endpoints=True)
            else:
                rhs = plane_wave_rhs(ctx.basis, wave, args.alpha)
            op = make_scheme_operator(ctx, args.scheme, seed=args.seed)
            report = op.solve(rhs, tol=args.tol)
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            from .matio import residuals_csv
            (out / "residuals.csv").write_text(residuals_csv(report.residuals))
            np.save(out / "solution.npy", report.solution)
            info(f"scheme={args.scheme} N={ctx.ze.shape[0]} iters={report.iterations} "
                 f"converged={report.converged}")
            return EX_OK if report.converged else EX_SOFTWARE

        if args.command in ("sweep-refine", "sweep-freq", "sweep-resonance"):
            from .spectral import (frequency_sweep, refinement_sweep,
                                   resonance_sweep, rows_to_csv)
            from .refine import dyadic_refine
            mesh = _geometry_mesh(args)
            schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
            if args.command == "sweep-refine":
                rows = refinement_sweep(mesh, args.levels, args.f, schemes,
                                        tol=args.tol,
                                        geometry=args.geometry)
            elif args.command == "sweep-freq":
                freqs = [float(x) for x in args.f_list.split(",") if x.strip()]
                hier = dyadic_refine(mesh, args.refine_j) if args.refine_j > 0 else None
                rows = frequency_sweep(mesh, freqs, schemes, hierarchy=hier,
                                       tol=args.tol, geometry=args.geometry)
            else:
                f0, f1 = (float(x) for x in args.window.split(","))
                hier = dyadic_refine(mesh, args.refine_j) if args.refine_j > 0 else None
                rows = resonance_sweep(mesh, (f0, f1), args.steps,
                                       schemes=tuple(schemes), hierarchy=hier,
                                       geometry=args.geometry)
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            csv = rows_to_csv(rows)
            (out / "results.csv").write_text(csv)
            if not quiet:
                print(csv, end="")
            failures = [r for r in rows if not r.converged]
            return EX_PARTIAL if failures else EX_OK

        if args.command == "run":
            from .config import ConfigError, parse_config
            from .runner import run_experiment
            path = Path(args.config)
            if not path.exists():
                print(f"config file not found: {path}", file=sys.stderr)
                return EX_DATAERR
            cfg = parse_config(path.read_text())
            code = run_experiment(cfg, out_dir=args.out)
            info(f"experiment finished with exit code {code}")
            return code

        parser.error(f"unknown subcommand {args.command!r}")
    except (MeshError, OffParseError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except ConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EX_SOFTWARE
    except Exception as exc:  # config errors etc.
        from .config import ConfigError
        if isinstance(exc, ConfigError):
            print(f"config error: {exc}", file=sys.stderr)
            return EX_DATAERR
        raise
    return EX_OK


if __name__ == "__main__":
    sys.exit(main())
