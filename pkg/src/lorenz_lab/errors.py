"""Exception hierarchy shared by all modules."""


class LorenzLabError(Exception):
    """Base class; ``code`` is the short name emitted in CLI error records."""

    @property
    def code(self):
        return type(self).__name__


# lorenz_core
class InvalidParameters(LorenzLabError, ValueError):
    pass


class DegenerateParameters(LorenzLabError):
    pass


class EigenFailure(LorenzLabError):
    pass


# integrator
class StiffnessFailure(LorenzLabError):
    pass


class NoEvent(LorenzLabError):
    pass


# section_geometry
class EmptyCurves(LorenzLabError):
    pass


class SectionInvalid(LorenzLabError):
    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = [] if offending is None else list(offending)


class NotTrapping(LorenzLabError):
    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = [] if offending is None else list(offending)


class NotOnSection(LorenzLabError):
    pass


# manifolds
class EigenStructureUnexpected(LorenzLabError):
    pass


class TooCloseToAxis(LorenzLabError):
    pass


class WindingNotInteger(LorenzLabError):
    pass


# connection_search
class Captured(LorenzLabError):
    """The separatrix fell into a fixed point before the wanted event."""

    def __init__(self, target, time=None):
        super().__init__(f"captured by {target}" + ("" if time is None else f" at t={time:.6g}"))
        self.target = target
        self.time = time


class BracketInvalid(LorenzLabError):
    pass


class SearchFailed(LorenzLabError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PathOutsideDomain(LorenzLabError):
    pass


# symbolic_knots
class NotPrimitive(LorenzLabError, ValueError):
    pass


class SeedNotFound(LorenzLabError):
    pass


class RefineFailed(LorenzLabError):
    pass


class GridTooSparse(LorenzLabError):
    pass


class SeparationTooSmall(LorenzLabError):
    pass


class ResolutionTooCoarse(LorenzLabError):
    pass


# cli
class ConfigError(LorenzLabError, ValueError):
    pass
