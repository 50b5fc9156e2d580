"""Exception types raised across the package."""


class ArtifactError(Exception):
    """Base class for all package errors."""


class NearDegenerate(ArtifactError):
    """Classification cannot be trusted at the working precision."""


class NotRealizable(ArtifactError):
    """A tuple of maps cannot be conjugated into PSL(2, R)."""


class PoleTooClose(ArtifactError):
    """A path or evaluation point violates the clearance from a singularity."""


class StepUnderflow(ArtifactError):
    """The adaptive integrator could not meet its tolerance."""


class NoConvergence(ArtifactError):
    """Newton iteration did not reach the residual target."""

    def __init__(self, iterations, best_residual, message=None):
        self.iterations = iterations
        self.best_residual = best_residual
        super().__init__(
            message
            or f"no convergence after {iterations} iterations "
            f"(best residual {best_residual:.3e})"
        )


class ExtrapolationDiverged(ArtifactError):
    """A limit extrapolation produced inconsistent estimates."""


class InversionFailed(ArtifactError):
    """Newton inversion of the developing map failed."""


class TailTooLarge(ArtifactError):
    """Truncated series tail exceeds the configured bound."""


class NonIntegrableDeclared(ArtifactError):
    """An integrand declared a singularity class the quadrature cannot handle."""


class ErrorTargetMissed(ArtifactError):
    """Quadrature refinement did not reach the requested error."""


class IllConditioned(ArtifactError):
    """A Gram matrix is too ill-conditioned to invert reliably."""


class DegenerateAction(ArtifactError):
    """Renormalized configuration has colliding points."""


class InvalidConfiguration(ArtifactError):
    """Puncture configuration outside the moduli space."""


class UnregisteredCell(ArtifactError):
    """A chain references a cell without a registered boundary."""


class ConventionMismatch(ArtifactError):
    """No sign convention in the registered family verifies an identity."""

    def __init__(self, message, defect=None):
        self.defect = defect
        super().__init__(message)


class StencilOutOfDomain(ArtifactError):
    """Finite-difference stencil leaves the moduli space."""
