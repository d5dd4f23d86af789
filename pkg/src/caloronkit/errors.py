"""Exception hierarchy shared across the toolkit."""


class CaloronKitError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(CaloronKitError):
    """Matrix or vector dimensions are inconsistent with the operation."""


class RankError(CaloronKitError):
    """A matrix fails a required rank condition."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class CommonComponentError(CaloronKitError):
    """Two curves share a component (identically-zero resultant)."""


class SchemaError(CaloronKitError):
    """A file does not conform to the expected JSON schema."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class InvariantError(CaloronKitError):
    """A loaded object violates one of its structural invariants."""


class StructureError(CaloronKitError):
    """A tensor does not have the required rank-one outer-product form."""


class SingularityHitError(CaloronKitError):
    """The flow blew up before reaching the end of the interval."""

    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class ResonanceError(CaloronKitError):
    """The series recursion hit a non-solvable resonant order."""

    def __init__(self, message, order=None):
        super().__init__(message)
        self.order = order


class MatchingError(CaloronKitError):
    """Boundary matching between the two intervals failed."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NonConservationError(CaloronKitError):
    """Spectral data drifted along an interval beyond tolerance."""


class NonGenericError(CaloronKitError):
    """A corank/transversality assumption fails at an intersection point."""


class InconsistencyError(CaloronKitError):
    """Both defining scalars of a divisor point are above tolerance."""


class DegeneracyError(CaloronKitError):
    """A basis construction lost its required dimensionality."""


class ResolutionError(CaloronKitError):
    """A grid is too coarse for the requested computation."""


class RankAnomalyError(CaloronKitError):
    """The boundary-value operator does not have the expected rank profile."""

    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class AlignmentError(CaloronKitError):
    """Frame gauge fixing failed (near-singular overlap)."""


class GenerationError(CaloronKitError):
    """The random generator exhausted its retry budget."""

    def __init__(self, message, last_failure=None):
        super().__init__(message)
        self.last_failure = last_failure
