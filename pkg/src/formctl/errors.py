"""Exception types shared across the toolkit."""

from __future__ import annotations


class FormationControlError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(FormationControlError):
    """Scenario configuration failed schema or semantic validation."""


class FormatError(FormationControlError):
    """A trace file has a missing, unknown, or incompatible format version."""


class NoSpanningTree(FormationControlError):
    """The interaction digraph has no spanning tree.

    Raised when the Laplacian zero eigenvalue is not simple, or when the
    left null vector cannot be normalized against the ones vector.
    """


class Infeasible(FormationControlError):
    """The requested formation violates the kinematic feasibility condition."""

    def __init__(self, message: str, per_agent_residuals=None):
        super().__init__(message)
        self.per_agent_residuals = per_agent_residuals


class NotPositiveDefinite(FormationControlError):
    """The Riccati kernel came out non positive definite (implementation bug)."""


class InvalidLambda2(FormationControlError):
    """The gain scaling eigenvalue real part is not strictly positive."""


class NotHurwitz(FormationControlError):
    """Some relative-motion mode is not asymptotically stable for the chosen gain."""

    def __init__(self, message: str, offenders=None):
        super().__init__(message)
        self.offenders = offenders if offenders is not None else []


class NonFiniteState(FormationControlError):
    """The integrated state left the finite range (divergence)."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time
