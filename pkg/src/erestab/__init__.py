"""Stability of elliptic relative equilibria in restricted N-body problems.

Builds central configurations of the primaries (collinear chains and
regular polygons with a central mass), attaches the massless body's
equilibrium, integrates the linearized Hamiltonian system over one period,
and decides linear stability from the monodromy spectrum and the twisted
Morse indices of the associated second-order operator.
"""

__version__ = "0.1.0"

from .central_config import (
    Configuration,
    FamilyKind,
    MassSystem,
    collinear_three_primaries,
    locate_offline_equilibria,
    moulton_collinear,
    offline_equilibrium,
    restricted_position,
    solve_euler_quintic,
    solve_symmetric_y,
    symmetric_four_body,
)
from .errors import (
    ConvergenceError,
    CurveExtractionError,
    DegenerateSolutionError,
    DomainError,
    ErestabError,
    ExistenceError,
    InvariantViolation,
    SingularityError,
)
from .linearization import (
    DMatrix,
    StabilityParams,
    b_matrix,
    b_matrix_d_form,
    compute_D,
    spectral_params,
    symmetric_beta,
    symmetric_z,
)
from .maslov import (
    IndexResult,
    assemble_operator,
    index_monodromy_consistency,
    kernel_dimension,
    morse_index,
    positivity_check,
    r_e_fourier_coefficients,
)
from .monodromy import (
    Monodromy,
    SpectrumVerdict,
    Verdict,
    classify_spectrum,
    integrate_fundamental,
    matrix_exponential,
)
from .polygon_config import (
    BangQuantities,
    PolygonSystem,
    Site,
    bang_quantities,
    h1,
    hn,
    polygon_configuration,
    polygon_limits,
    solve_site,
)
from .scan import (
    CurveKind,
    CurvePoint,
    MassScanPoint,
    MstarResult,
    PolygonVerdictRecord,
    ScanRecord,
    ScanSettings,
    find_curves,
    find_mstar,
    mass_scan_4body,
    polygon_verdicts,
    region_of,
    scan_theta,
)

__all__ = [
    "__version__",
    "BangQuantities",
    "Configuration",
    "ConvergenceError",
    "CurveExtractionError",
    "CurveKind",
    "CurvePoint",
    "DMatrix",
    "DegenerateSolutionError",
    "DomainError",
    "ErestabError",
    "ExistenceError",
    "FamilyKind",
    "IndexResult",
    "InvariantViolation",
    "MassScanPoint",
    "MassSystem",
    "Monodromy",
    "MstarResult",
    "PolygonSystem",
    "PolygonVerdictRecord",
    "ScanRecord",
    "ScanSettings",
    "SingularityError",
    "Site",
    "SpectrumVerdict",
    "StabilityParams",
    "Verdict",
    "assemble_operator",
    "b_matrix",
    "b_matrix_d_form",
    "bang_quantities",
    "classify_spectrum",
    "collinear_three_primaries",
    "compute_D",
    "find_curves",
    "find_mstar",
    "h1",
    "hn",
    "index_monodromy_consistency",
    "integrate_fundamental",
    "kernel_dimension",
    "locate_offline_equilibria",
    "mass_scan_4body",
    "matrix_exponential",
    "morse_index",
    "moulton_collinear",
    "offline_equilibrium",
    "polygon_configuration",
    "polygon_limits",
    "polygon_verdicts",
    "positivity_check",
    "r_e_fourier_coefficients",
    "region_of",
    "restricted_position",
    "scan_theta",
    "solve_euler_quintic",
    "solve_site",
    "solve_symmetric_y",
    "spectral_params",
    "symmetric_beta",
    "symmetric_four_body",
    "symmetric_z",
]
