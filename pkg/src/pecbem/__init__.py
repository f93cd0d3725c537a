"""pecbem: boundary-element workbench for PEC scattering.

Assembles EFIE/MFIE/CFIE Galerkin systems over RWG functions on closed
triangulated surfaces and studies how quasi-Helmholtz and hierarchical-basis
preconditioners remove the low-frequency and dense-discretization breakdowns.
"""

__version__ = "0.1.0"

from .assembly import (AssemblyOptions, PlaneWave, SystemMatrix, assemble_efie,
                       assemble_efie_mfie, assemble_gram, assemble_mfie,
                       combine_cfie, efie_matrix, plane_wave_rhs,
                       static_limit_blocks)
from .basis import (DiagonalScaling, RwgBasis, SparseTransform, composite_basis,
                    graph_laplacian, level_scaling, loop_matrix, rwg_space,
                    star_matrix)
from .constants import (FREE_SPACE_IMPEDANCE_OHM, SPEED_OF_LIGHT_M_PER_S,
                        wavenumber_from_frequency)
from .mesh import (MeshStats, SurfaceMesh, Topology, build_topology,
                   generate_cube_mesh, generate_tetrahedron, mesh_statistics)
from .multilevel import (agglomerated_hierarchical_star, coarse_to_fine_rwg,
                         hierarchical_nodal_loops, hierarchical_star)
from .offio import read_off, write_off
from .precond import (LeftPreconditioner, ProjectorContext, build_left_preconditioner,
                      build_projector, estimate_spectral_norm, jacobi_rescale,
                      solenoidal_projector_apply, split_preconditioned_system)
from .refine import RefinementHierarchy, dyadic_refine
from .solvers import SolveReport, cg, gmres
from .spectral import (ExperimentContext, SpectrumReport, SweepRow, build_context,
                       condition_number, frequency_sweep, make_scheme_operator,
                       preconditioned_condition_number, refinement_sweep,
                       resonance_sweep)

__all__ = [name for name in dir() if not name.startswith("_")]
