"""Exception hierarchy shared by every thetasim module."""


class ThetasimError(Exception):
    """Base class for all errors raised by this package."""


class BadParameter(ThetasimError, ValueError):
    """A numeric or categorical parameter is outside its allowed range."""


class CircuitError(ThetasimError):
    """A circuit description is malformed.

    ``field`` points at the offending location in the structured description
    (``"segments[3].to"``) when one is known; ``line`` is set for JSON syntax
    errors.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class CircuitParseError(CircuitError):
    pass


class CyclicGraph(CircuitError):
    pass


class DanglingPort(CircuitError):
    pass


class DuplicateId(CircuitError):
    pass


class MissingSource(CircuitError):
    pass


class MultipleSources(CircuitError):
    pass


class UnreachableElement(CircuitError):
    pass


class UnreachableDetector(UnreachableElement):
    pass


class BadElementParameter(CircuitError, BadParameter):
    pass


class NoPath(ThetasimError):
    pass


class AmbiguousPath(ThetasimError):
    """Several source-to-detector paths exist; ``delays`` lists each one."""

    def __init__(self, detector, delays):
        self.detector = detector
        self.delays = list(delays)
        super().__init__(f"{len(self.delays)} paths reach {detector!r}: delays {self.delays}")


class AllPathsBlocked(ThetasimError):
    pass


class ZeroTotalIntensity(ThetasimError):
    pass


class AcronPacketNotAllowed(ThetasimError):
    pass


class AcronLost(ThetasimError):
    """The corpuscle vanished without a terminal event (engine bug)."""


class MalformedLog(ThetasimError):
    pass


class ImpossibleOutcome(ThetasimError):
    """An outcome with expected probability zero was observed."""

    def __init__(self, outcomes):
        self.outcomes = dict(outcomes)
        super().__init__(f"observed outcomes with zero expected probability: {self.outcomes}")


class SpecMismatch(ThetasimError):
    pass
