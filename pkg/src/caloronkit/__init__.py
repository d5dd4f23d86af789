"""caloronkit: Nahm data on the circle and the associated caloron fields.

Core objects: interval solutions of Nahm's equations with pole or
rank-one-jump boundary data, their spectral curves and divisor splittings,
the monad-matrix moduli description, and the inverse transform producing
SU(2) connection data on spacetime grids.
"""

from .errors import (
    AlignmentError,
    CaloronKitError,
    CommonComponentError,
    DegeneracyError,
    DimensionError,
    GenerationError,
    InconsistencyError,
    InvariantError,
    MatchingError,
    NonConservationError,
    NonGenericError,
    RankAnomalyError,
    RankError,
    ResolutionError,
    ResonanceError,
    SchemaError,
    SingularityHitError,
    StructureError,
)
from .flow import (
    AS_GIVEN,
    T0_ZERO,
    FlowConfig,
    flow_circle,
    frobenius_series,
    frobenius_start,
    integrate_interval,
    nahm_rhs,
)
from .moduli import (
    GenericityReport,
    MonadData,
    genericity_check,
    gl_action,
    m_matrix,
    monad_residuals,
    random_generic,
    shift_matrix,
    spectral_fingerprint,
)
from .nahmdata import (
    LARGE,
    SMALL,
    IntervalSolution,
    JumpData,
    NahmData,
    PoleData,
    RankProfile,
    ValidationReport,
    build_A,
    build_Aplus,
    jump_u_vector,
    symmetry_defect,
    validate,
)
from .polyalg import (
    BiPoly,
    Point,
    PointDivisor,
    char_poly_eta,
    classical_adjoint,
    intersect_curves,
    is_real_curve,
    rank_one_factor,
    tau_point,
)
from .spectral import (
    DivisorSplit,
    SpectralPair,
    curves_of,
    extract_FG,
    split_divisor_j0,
    split_divisor_jpos,
)
from .transform import (
    CaloronFrame,
    DiracFamily,
    FieldGrid,
    SpacetimePoint,
    asymptotics_check,
    build_dirac,
    cokernel,
    connection_at,
    curvature_grid,
    frames_on_grid,
    sd_residual,
)

__version__ = "0.1.0"
