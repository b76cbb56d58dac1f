"""Exception hierarchy shared by the solver modules."""


class TwoPhaseError(Exception):
    """Base class for all errors raised by :mod:`twophase`."""


class DomainError(TwoPhaseError, ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class GeometryError(TwoPhaseError, ValueError):
    """A boundary perturbation is not admissible."""


class SolverError(TwoPhaseError, RuntimeError):
    """The collocation system is numerically singular."""


class ConvergenceError(SolverError):
    """Newton iteration failed to reach the requested tolerance."""
