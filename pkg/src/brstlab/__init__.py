"""Finite-dimensional BRST cohomology, Dirac constraints and ghost representations."""

from .bosons import (
    BosonicSector,
    CombinedComplex,
    TruncatedComplex,
    build_bosonic_sector,
    build_combined_Q,
    build_ko_abelian_Q,
    gupta_bleuler_compare,
    ladder_kernel_check,
)
from .cohomology import (
    DspData,
    brst_physical_algebra,
    dsp_decompose,
    ker_delta,
    phi_s,
    physicality_check,
    ran_delta,
    state_condition_check,
    structure_theorem_check,
    superderivation_matrix,
)
from .dirac import commutant, compare_dirac_brst, dirac_constrain
from .errors import (
    BrstLabError,
    ClosureError,
    DimensionError,
    GradingError,
    NilpotencyError,
    NotHermitianError,
    RankAmbiguityError,
    ShapeError,
    SizeError,
    StructureTheoremViolation,
    UnsupportedError,
)
from .ghosts import BerezinRep, GhostRep, build_berezin, build_ghost_rep, eta, ghost_grading, rho
from .hamiltonian import (
    BrstComplex,
    ConstraintSystem,
    build_hamiltonian_Q,
    delta_operator,
    mcps_report,
)
from .linalg import DEFAULT_TOL, KreinSpace, Tolerance, krein_adjoint
from .operators import OperatorSubspace
from .report import Report, SystemSpec, emit, run_pipeline

__all__ = [
    "BerezinRep",
    "BosonicSector",
    "BrstComplex",
    "BrstLabError",
    "ClosureError",
    "CombinedComplex",
    "ConstraintSystem",
    "DEFAULT_TOL",
    "DimensionError",
    "DspData",
    "GhostRep",
    "GradingError",
    "KreinSpace",
    "NilpotencyError",
    "NotHermitianError",
    "OperatorSubspace",
    "RankAmbiguityError",
    "Report",
    "ShapeError",
    "SizeError",
    "StructureTheoremViolation",
    "SystemSpec",
    "Tolerance",
    "TruncatedComplex",
    "UnsupportedError",
    "brst_physical_algebra",
    "build_berezin",
    "build_bosonic_sector",
    "build_combined_Q",
    "build_ghost_rep",
    "build_hamiltonian_Q",
    "build_ko_abelian_Q",
    "commutant",
    "compare_dirac_brst",
    "delta_operator",
    "dirac_constrain",
    "dsp_decompose",
    "emit",
    "eta",
    "ghost_grading",
    "gupta_bleuler_compare",
    "ker_delta",
    "krein_adjoint",
    "ladder_kernel_check",
    "mcps_report",
    "phi_s",
    "physicality_check",
    "ran_delta",
    "rho",
    "run_pipeline",
    "state_condition_check",
    "structure_theorem_check",
    "superderivation_matrix",
]

__version__ = "0.1.0"
