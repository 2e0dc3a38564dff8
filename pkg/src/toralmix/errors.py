"""Exception hierarchy shared across the package."""


class ToralError(ValueError):
    """Base class for all domain errors raised by toralmix."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotUnimodular(ToralError):
    pass


class NotHyperbolic(ToralError):
    pass


class ConePropertyError(ToralError):
    """A clause of the cone property failed; ``witness`` says where."""


class ConeNotInvariant(ConePropertyError):
    pass


class NoExpansion(ConePropertyError):
    pass


class NoContraction(ConePropertyError):
    pass


class EigendirectionOnBoundary(ConePropertyError):
    pass


class ConesOverlap(ConePropertyError):
    pass


class NotSignDefinite(ConePropertyError):
    pass


class CapExceeded(ToralError):
    pass


class EmptyIntersection(ToralError):
    pass


class NotInCone(ToralError):
    pass


class ZeroVector(ToralError):
    pass


class AliasingRisk(ToralError):
    pass


class WordTooShort(ToralError):
    pass
