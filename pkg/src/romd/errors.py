"""Exception types shared across the package."""


class RomdError(Exception):
    """Base class for all romd errors."""


class ConfigError(RomdError):
    """Invalid or unparsable run configuration."""


class NonNeutralSource(RomdError):
    """Poisson source charge is not neutral; indicates a bookkeeping bug."""


class NonPositiveShift(RomdError):
    """Preconditioner shift must be positive."""


class WidthTooSmall(RomdError):
    """A Gaussian width is unresolvable on the grid (r_c < 2h)."""


class SingularGram(RomdError):
    """Wavefunction Gram matrix is numerically singular."""


class NotConverged(RomdError):
    """An iterative solver hit its iteration cap.

    Carries the iteration count and the last residual (or free-energy delta)
    so callers can decide whether to accept, retry, or abort.
    """

    def __init__(self, message, iterations=None, residual=None, result=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.result = result


class MissingForces(RomdError):
    """Verlet update requested before forces were evaluated."""


class DegenerateGeometry(RomdError):
    """Bond observables undefined (bond length below threshold)."""


class CollinearGeometry(RomdError):
    """Canonical molecular frame undefined for (nearly) collinear bonds."""


class InvalidPlan(RomdError):
    """Sampling plan with non-positive interval counts."""


class EmptySnapshot(RomdError):
    """Snapshot matrix is empty or all-zero."""


class InfeasibleFilling(RomdError):
    """More occupied states requested than basis vectors available."""


class LengthMismatch(RomdError):
    """Trajectories of different lengths cannot be compared."""


class BadMagic(RomdError):
    """File does not start with the expected magic bytes."""


class VersionMismatch(RomdError):
    """File format version is not supported."""


class DimensionMismatch(RomdError):
    """File header dimensions are inconsistent with the data or grid."""


class TruncatedFile(RomdError):
    """File ends before the payload announced in its header."""


class OrthonormalityLost(RomdError):
    """A basis read from disk is too far from orthonormal to repair."""


class DegenerateFillingWarning(UserWarning):
    """All reduced states forced fully occupied (N0 equals basis size)."""


class DomainWarning(UserWarning):
    """Geometry left the sampled training domain (extrapolation)."""
