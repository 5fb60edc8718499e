"""Completion of j-unitary rational matrix functions and explicit direct and
inverse scattering for Dirac-type systems with pseudo-exponential potentials,
including slowly decaying and singular ones."""

from .completion import (
    JSignature,
    ParameterSet,
    build_W,
    check_j_unitarity,
    extract_R_from_W,
    parameters_from_reflection,
    unitary_completion,
)
from .dirac import (
    KappaMode,
    KappaR,
    PotentialEvaluator,
    ScatteringCoefficients,
    accumulate_S,
    chi,
    chi_inverse,
    fundamental_u,
    fundamental_w,
    kappa_R,
    lambda_profile,
    potential_v,
    scattering_coefficients,
    special_solutions_YZ,
)
from .errors import (
    ImproperEntry,
    LimitNotConverged,
    NoConvergence,
    NonConvergence,
    NotAdmissible,
    NotContractive,
    NotMonic,
    PescatError,
    PoleProximity,
    RealSpectrumUnresolved,
    Singular,
    SingularAt,
    SingularPotential,
    SpectraOverlap,
    SwapFailure,
)
from .inverse import InverseResult, RoundTripReport, invert_from_reflection, roundtrip_check
from .odeverify import IntegrationResult, derivative_check, integrate_dirac, numeric_reflection
from .realization import (
    RationalRealization,
    contractive_on_real_line,
    evaluate,
    from_rational_entries,
    invert,
    is_controllable,
    is_observable,
    mcmillan_degree,
    minimal_reduce,
    similarity_between,
)
from .riccati import (
    Definiteness,
    RiccatiProblem,
    RiccatiSolution,
    classify_definiteness,
    hamiltonian,
    solve as solve_riccati,
    verify as verify_riccati,
)

__version__ = "0.1.0"
