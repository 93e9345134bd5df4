"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside an operation's domain (shape mismatch, unstable A, not in the cone...)."""


class SolverFailure(RuntimeError):
    """A numerical routine did not converge within its iteration cap."""


class Inconclusive(RuntimeError):
    """A decision could not be made at the requested tolerance."""
