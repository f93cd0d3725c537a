"""Condition numbers, preconditioning schemes, and the sweep experiments.

A scheme descriptor is "<formulation>:<preconditioner>" with formulation in
{efie, cfie, mfie} and preconditioner in

    none       raw system
    loopstar   split basis [loops | stars]
    loop-hns   split basis [loops | hierarchical non-solenoidal]
    hloop-hns  split basis [hierarchical loops | hierarchical non-solenoidal]
    projector  left preconditioner M = P/alpha + S D^2 S^T / beta

Split bases are rescaled per `dphi`: "jacobi" (default; every basis column
normalized against the system diagonal, replacing the dyadic scalings),
"dyadic" (2^{s l} / 2^{-l} level scalings with the 1/sqrt(k), sqrt(k)
frequency factors), or "both" (dyadic first, Jacobi on top).  Sweeps report
both the dense-SVD condition number and non-restarted GMRES iteration counts
and verify that preconditioning leaves the recovered RWG solution unchanged
against a dense direct solve.
"""

import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .assembly import (AssemblyOptions, PlaneWave, assemble_efie_mfie,
                       assemble_gram, combine_cfie, efie_matrix, plane_wave_rhs)
from .basis import (SparseTransform, composite_basis, concat_transforms,
                    loop_matrix, rwg_space, scale_columns, star_matrix)
from .constants import FREE_SPACE_IMPEDANCE_OHM, wavenumber_from_frequency
from .errors import MeshError
from .mesh import SurfaceMesh, build_topology, mesh_statistics
from .multilevel import (agglomerated_hierarchical_star, hierarchical_nodal_loops,
                         hierarchical_star)
from .precond import (LeftPreconditioner, build_left_preconditioner,
                      jacobi_rescale, split_preconditioned_system)
from .refine import RefinementHierarchy, dyadic_refine
from .solvers import SolveReport, gmres

DEFAULT_DENSE_CAP = 4096

SPLIT_PRECONDS = ("loopstar", "loop-hns", "hloop-hns")
ALL_PRECONDS = ("none",) + SPLIT_PRECONDS + ("projector",)
FORMULATIONS = ("efie", "cfie", "mfie")


@dataclass(frozen=True)
class SpectrumReport:
    singular_values: np.ndarray
    cond: float
    metadata: dict

    def __post_init__(self):
        sv = np.asarray(self.singular_values)
        if np.any(np.diff(sv) > 0):
            object.__setattr__(self, "singular_values", np.sort(sv)[::-1])


def condition_number(a: np.ndarray, dense_cap: int = DEFAULT_DENSE_CAP) -> float:
    """sigma_max / sigma_min by full SVD; inf marker on exact singularity."""
    a = np.asarray(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"square matrix required, got {a.shape}")
    if a.shape[0] > dense_cap:
        raise MeshError(
            f"matrix size {a.shape[0]} exceeds the dense cap {dense_cap}; "
            "use iteration-count mode")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[-1] <= sv[0] * np.finfo(float).eps:
        return np.inf
    return float(sv[0] / sv[-1])


def parse_scheme(scheme: str):
    if ":" not in scheme:
        raise ValueError(f"scheme must be '<formulation>:<preconditioner>', got {scheme!r}")
    formulation, precond = scheme.split(":", 1)
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r} in {scheme!r}")
    if precond not in ALL_PRECONDS:
        raise ValueError(f"unknown preconditioner {precond!r} in {scheme!r}")
    return formulation, precond


@dataclass
class ExperimentContext:
    """Assembled matrices and cached transforms for one (mesh, frequency)."""

    mesh: SurfaceMesh
    hierarchy: Optional[RefinementHierarchy]
    f_hz: float
    k: float
    alpha: float
    eta: float
    basis: object
    topology: object
    ze: np.ndarray
    zm: np.ndarray
    zc: np.ndarray
    gff: np.ndarray
    _cache: dict = field(default_factory=dict)

    def system(self, formulation: str) -> np.ndarray:
        if formulation == "efie":
            return self.ze
        if formulation == "cfie":
            return self.zc
        if formulation == "mfie":
            return self.eta * self.zm
        raise ValueError(formulation)

    def loops_drop(self) -> SparseTransform:
        return self._memo("loops_drop", lambda: loop_matrix(self.topology, True))

    def loops_full(self) -> SparseTransform:
        return self._memo("loops_full", lambda: loop_matrix(self.topology, False))

    def stars_drop(self) -> SparseTransform:
        return self._memo("stars_drop", lambda: star_matrix(self.topology, True))

    def hierarchical_loops(self) -> SparseTransform:
        if self.hierarchy is None or self.hierarchy.levels == 0:
            raise MeshError("hierarchical loops require a refinement hierarchy")
        return self._memo("hloops", lambda: hierarchical_nodal_loops(self.hierarchy))

    def nonsolenoidal(self) -> SparseTransform:
        """Hierarchical non-solenoidal basis: structured if a hierarchy is
        present, agglomerated otherwise."""
        if self.hierarchy is not None and self.hierarchy.levels > 0:
            return self._memo("hstars", lambda: hierarchical_star(self.hierarchy))
        return self._memo("aggstars",
                          lambda: agglomerated_hierarchical_star(self.topology))

    def _memo(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]


def build_context(mesh: SurfaceMesh = None, hierarchy: RefinementHierarchy = None,
                  f_hz: float = 1e6, alpha: float = 0.5,
                  eta: float = FREE_SPACE_IMPEDANCE_OHM,
                  options: AssemblyOptions = AssemblyOptions()) -> ExperimentContext:
    if hierarchy is not None:
        mesh = hierarchy.fine
        topology = hierarchy.fine_topology
    elif mesh is not None:
        topology = build_topology(mesh)
    else:
        raise ValueError("either mesh or hierarchy is required")
    basis = rwg_space(topology)
    k = wavenumber_from_frequency(f_hz)
    za, zphi, zm = assemble_efie_mfie(basis, k, options)
    ze = efie_matrix(za, zphi)
    gff = assemble_gram(basis)
    zc = combine_cfie(ze, zm, alpha, eta)
    return ExperimentContext(mesh=mesh, hierarchy=hierarchy, f_hz=f_hz, k=k,
                             alpha=alpha, eta=eta, basis=basis, topology=topology,
                             ze=ze.values, zm=zm.values, zc=zc.values,
                             gff=gff.values)


def _split_transform(ctx: ExperimentContext, precond: str, dphi: str,
                     z: np.ndarray) -> SparseTransform:
    if precond == "loopstar":
        loop_t, star_t = ctx.loops_drop(), ctx.stars_drop()
        s_exp = 0.0
    elif precond == "loop-hns":
        loop_t, star_t = ctx.loops_drop(), ctx.nonsolenoidal()
        s_exp = 0.0
    elif precond == "hloop-hns":
        loop_t, star_t = ctx.hierarchical_loops(), ctx.nonsolenoidal()
        s_exp = 2.0
    else:
        raise ValueError(precond)
    if dphi == "jacobi":
        h_raw = concat_transforms(loop_t, star_t)
        return scale_columns(h_raw, jacobi_rescale(h_raw, z))
    h = composite_basis(loop_t, s_exp, star_t, ctx.k)
    if dphi == "both":
        return scale_columns(h, jacobi_rescale(h, z))
    if dphi == "dyadic":
        return h
    raise ValueError(f"unknown dphi mode {dphi!r}")


@dataclass
class SchemeOperator:
    """Everything needed to solve and analyze one scheme on one context."""

    scheme: str
    z: np.ndarray
    transform: Optional[SparseTransform] = None
    left: Optional[LeftPreconditioner] = None

    def solve(self, v: np.ndarray, tol: float, max_iter: int = 4000) -> SolveReport:
        if self.transform is not None:
            zt, vt = split_preconditioned_system(self.transform, self.z, v)
            report = gmres(lambda x: zt @ x, vt, tol=tol, max_iter=max_iter)
            report.solution = self.transform.matrix @ report.solution
            return report
        if self.left is not None:
            return gmres(lambda x: self.z @ x, v, tol=tol, max_iter=max_iter,
                         left_precond=self.left.apply)
        return gmres(lambda x: self.z @ x, v, tol=tol, max_iter=max_iter)

    def preconditioned_matrix(self) -> np.ndarray:
        if self.transform is not None:
            h = self.transform.matrix.toarray()
            return h.T @ self.z @ h
        if self.left is not None:
            return self.left.dense() @ self.z
        return self.z


def make_scheme_operator(ctx: ExperimentContext, scheme: str, dphi: str = "jacobi",
                         seed: int = 0, power_tol: float = 1e-3,
                         inner_tol: float = 1e-12) -> SchemeOperator:
    formulation, precond = parse_scheme(scheme)
    z = ctx.system(formulation)
    if precond == "none":
        return SchemeOperator(scheme=scheme, z=z)
    if precond in SPLIT_PRECONDS:
        return SchemeOperator(scheme=scheme, z=z,
                              transform=_split_transform(ctx, precond, dphi, z))
    # projector scheme: D_phi from the EFIE diagonal by default
    nonsol = ctx.nonsolenoidal()
    if dphi in ("jacobi", "both"):
        d_phi = jacobi_rescale(nonsol, ctx.ze)
    else:
        from .basis import level_scaling
        d_phi = level_scaling(nonsol)
    left = build_left_preconditioner(ctx.loops_full(), ctx.topology.vertex_components,
                                     nonsol, d_phi, z, power_tol=power_tol,
                                     seed=seed, inner_tol=inner_tol)
    return SchemeOperator(scheme=scheme, z=z, left=left)


def preconditioned_condition_number(ctx: ExperimentContext, scheme: str,
                                    dphi: str = "jacobi", seed: int = 0,
                                    dense_cap: int = DEFAULT_DENSE_CAP) -> SpectrumReport:
    op = make_scheme_operator(ctx, scheme, dphi=dphi, seed=seed)
    mat = op.preconditioned_matrix()
    if mat.shape[0] > dense_cap:
        raise MeshError(f"dense cap {dense_cap} exceeded; use iteration counts")
    sv = np.linalg.svd(mat, compute_uv=False)
    cond = np.inf if sv[-1] <= sv[0] * np.finfo(float).eps else float(sv[0] / sv[-1])
    stats = mesh_statistics(ctx.mesh, ctx.topology)
    return SpectrumReport(singular_values=sv, cond=cond,
                          metadata={"scheme": scheme, "f_hz": ctx.f_hz,
                                    "h_avg": stats.h_avg, "mesh": ctx.mesh.fingerprint()})


@dataclass
class SweepRow:
    geometry: str
    h_avg: float
    inv_h: float
    f_hz: float
    scheme: str
    cond: float
    iters: int
    converged: bool
    wall_s: float
    solution_rel_err: float = np.nan
    residuals: list = field(default_factory=list)

    CSV_HEADER = "geometry,h_avg,inv_h,f_hz,scheme,cond,iters,converged,wall_s"

    def as_csv_row(self, with_wall: bool = True) -> str:
        base = (f"{self.geometry},{self.h_avg:.9g},{self.inv_h:.9g},{self.f_hz:.9g},"
                f"{self.scheme},{self.cond:.9g},{self.iters},"
                f"{str(self.converged).lower()}")
        return base + (f",{self.wall_s:.3f}" if with_wall else "")


def _run_scheme_row(ctx: ExperimentContext, scheme: str, geometry: str,
                    tol: float, dphi: str, seed: int, dense_cap: int,
                    wave: PlaneWave, rhs: np.ndarray,
                    direct: Optional[np.ndarray]) -> SweepRow:
    stats = mesh_statistics(ctx.mesh, ctx.topology)
    t0 = time.perf_counter()
    op = make_scheme_operator(ctx, scheme, dphi=dphi, seed=seed)
    n = ctx.ze.shape[0]
    cond = np.nan
    if n <= dense_cap:
        mat = op.preconditioned_matrix()
        sv = np.linalg.svd(mat, compute_uv=False)
        cond = np.inf if sv[-1] <= sv[0] * np.finfo(float).eps else float(sv[0] / sv[-1])
    report = op.solve(rhs, tol=tol)
    wall = time.perf_counter() - t0
    converged = report.converged
    # a-posteriori guard: the recovered RWG solution must still satisfy the
    # original system; preconditioned norms can otherwise mislead
    true_resid = float(np.linalg.norm(rhs - op.z @ report.solution)
                       / np.linalg.norm(rhs))
    rel_err = np.nan
    if direct is not None:
        rel_err = float(np.linalg.norm(report.solution - direct)
                        / np.linalg.norm(direct))
    if true_resid > 1e3 * tol:
        converged = False
    return SweepRow(geometry=geometry, h_avg=stats.h_avg, inv_h=1.0 / stats.h_avg,
                    f_hz=ctx.f_hz, scheme=scheme, cond=cond, iters=report.iterations,
                    converged=converged, wall_s=wall, solution_rel_err=rel_err,
                    residuals=list(report.residuals))


def _default_wave(k: float, eta: float) -> PlaneWave:
    return PlaneWave(direction=np.array([0.0, 0.0, 1.0]),
                     polarization=np.array([1.0, 0.0, 0.0]),
                     amplitude=1.0, k=k, eta=eta)


def sweep_context_rows(ctx: ExperimentContext, schemes: Sequence[str], geometry: str,
                       tol: float = 1e-6, dphi: str = "jacobi", seed: int = 0,
                       dense_cap: int = DEFAULT_DENSE_CAP,
                       options: AssemblyOptions = AssemblyOptions()) -> List[SweepRow]:
    """All requested schemes on one assembled context."""
    wave = _default_wave(ctx.k, ctx.eta)
    rows = []
    rhs_by_form = {}
    direct_by_form = {}
    n = ctx.ze.shape[0]
    for scheme in schemes:
        formulation, _ = parse_scheme(scheme)
        if formulation not in rhs_by_form:
            if formulation == "efie":
                v = plane_wave_rhs(ctx.basis, wave, 1.0, options, allow_endpoints=True)
            elif formulation == "mfie":
                v = ctx.eta * plane_wave_rhs(ctx.basis, wave, 0.0, options,
                                             allow_endpoints=True)
            else:
                v = plane_wave_rhs(ctx.basis, wave, ctx.alpha, options)
            rhs_by_form[formulation] = v
            direct_by_form[formulation] = (
                np.linalg.solve(ctx.system(formulation), v) if n <= dense_cap else None)
        try:
            rows.append(_run_scheme_row(ctx, scheme, geometry, tol, dphi, seed,
                                        dense_cap, wave, rhs_by_form[formulation],
                                        direct_by_form[formulation]))
        except Exception as exc:  # per-row failures recorded, sweep continues
            stats = mesh_statistics(ctx.mesh, ctx.topology)
            rows.append(SweepRow(geometry=geometry, h_avg=stats.h_avg,
                                 inv_h=1.0 / stats.h_avg, f_hz=ctx.f_hz,
                                 scheme=scheme, cond=np.nan, iters=-1,
                                 converged=False, wall_s=0.0))
            rows[-1].failure = str(exc)
    return rows


def refinement_sweep(base_mesh: SurfaceMesh, levels: int, f_hz: float,
                     schemes: Sequence[str], tol: float = 1e-6, alpha: float = 0.5,
                     dphi: str = "jacobi", seed: int = 0,
                     dense_cap: int = DEFAULT_DENSE_CAP,
                     options: AssemblyOptions = AssemblyOptions(),
                     geometry: str = "cube") -> List[SweepRow]:
    """Fixed frequency, dyadic refinements J = 0..levels of the base mesh."""
    full = dyadic_refine(base_mesh, levels)
    rows = []
    for J in range(levels + 1):
        hier = RefinementHierarchy(
            meshes=full.meshes[:J + 1], topologies=full.topologies[:J + 1],
            edge_children=full.edge_children[:J], edge_midpoint=full.edge_midpoint[:J],
            face_children=full.face_children[:J])
        ctx = build_context(hierarchy=hier, f_hz=f_hz, alpha=alpha, options=options)
        rows.extend(sweep_context_rows(ctx, schemes, geometry, tol=tol, dphi=dphi,
                                       seed=seed, dense_cap=dense_cap, options=options))
    return rows


def frequency_sweep(mesh: SurfaceMesh, f_list: Sequence[float], schemes: Sequence[str],
                    hierarchy: RefinementHierarchy = None, tol: float = 1e-6,
                    alpha: float = 0.5, dphi: str = "jacobi", seed: int = 0,
                    dense_cap: int = DEFAULT_DENSE_CAP,
                    options: AssemblyOptions = AssemblyOptions(),
                    geometry: str = "cube") -> List[SweepRow]:
    rows = []
    for f in f_list:
        ctx = build_context(mesh=mesh, hierarchy=hierarchy, f_hz=f, alpha=alpha,
                            options=options)
        rows.extend(sweep_context_rows(ctx, schemes, geometry, tol=tol, dphi=dphi,
                                       seed=seed, dense_cap=dense_cap, options=options))
    return rows


def resonance_sweep(mesh: SurfaceMesh, f_window, steps: int,
                    schemes: Sequence[str] = ("efie:none", "cfie:none", "cfie:projector"),
                    hierarchy: RefinementHierarchy = None, tol: float = 1e-6,
                    alpha: float = 0.5, dphi: str = "jacobi", seed: int = 0,
                    dense_cap: int = DEFAULT_DENSE_CAP,
                    options: AssemblyOptions = AssemblyOptions(),
                    geometry: str = "cube") -> List[SweepRow]:
    """Uniform frequency scan across a window bracketing a cavity resonance."""
    f0, f1 = f_window
    if steps < 1:
        raise ValueError("steps must be >= 1")
    freqs = [0.5 * (f0 + f1)] if steps == 1 else list(np.linspace(f0, f1, steps))
    return frequency_sweep(mesh, freqs, schemes, hierarchy=hierarchy, tol=tol,
                           alpha=alpha, dphi=dphi, seed=seed, dense_cap=dense_cap,
                           options=options, geometry=geometry)


def rows_to_csv(rows: List[SweepRow], with_wall: bool = True) -> str:
    header = SweepRow.CSV_HEADER if with_wall else SweepRow.CSV_HEADER.rsplit(",", 1)[0]
    return "\n".join([header] + [r.as_csv_row(with_wall) for r in rows]) + "\n"
