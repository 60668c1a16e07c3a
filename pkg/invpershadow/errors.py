"""Exception hierarchy shared by every module of the package."""


class InvPerShadowError(Exception):
    """Base class for all errors raised by invpershadow."""


class ChartDomainError(InvPerShadowError, ValueError):
    """A tangent vector lies outside the chart ball where a local map is defined."""


class InvalidOrbitError(InvPerShadowError, ValueError):
    """A claimed periodic orbit does not close up under the system."""


class NotToralAutomorphismError(InvPerShadowError, ValueError):
    """An operation restricted to integer toral automorphisms got another system."""


class BackwardGenerationError(InvPerShadowError):
    """A pseudomethod map could not be inverted near the required point."""


class GluingPreconditionError(InvPerShadowError, ValueError):
    """The radii, defect or cond1 requirements of a gluing are violated."""


class RemainderBoundError(GluingPreconditionError):
    """The remainder of the local conjugate exceeds d/2 on the gluing ball; d must shrink."""


class AdversarySpecError(InvPerShadowError, ValueError):
    """Parameters of an adversary construction violate its invariants."""


class NonhyperbolicOrbitError(InvPerShadowError, ValueError):
    """The operation needs a hyperbolic periodic orbit."""

    def __init__(self, message: str, witness_modulus: float | None = None):
        super().__init__(message)
        self.witness_modulus = witness_modulus


class NonConvergenceError(InvPerShadowError):
    """The shadowing fixed-point iteration did not converge."""

    def __init__(self, message: str, iterations: int = 0, last_increment: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.last_increment = last_increment


class ConfigError(InvPerShadowError, ValueError):
    """An experiment configuration file could not be parsed or validated."""
