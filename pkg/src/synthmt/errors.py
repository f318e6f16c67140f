"""Exception hierarchy shared by the pipeline stages."""


class SynthError(Exception):
    """Base class for every error raised by synthmt."""


class ContractViolation(SynthError, ValueError):
    """A caller broke a precondition (missing variable, wrong sort, bad width)."""


# -- front end -------------------------------------------------------------

class ParseError(SynthError):
    def __init__(self, message, line=None, col=None, filename=None):
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename
        super().__init__(self.render())

    def render(self):
        where = self.filename or "<spec>"
        if self.line is None:
            return f"{where}: {self.message}"
        return f"{where}:{self.line}:{self.col}: {self.message}"

    def with_filename(self, filename):
        return type(self)(self.message, self.line, self.col, filename)


class UndeclaredVariable(ParseError):
    pass


class MixedSorts(ParseError):
    pass


class UnsupportedFragment(ParseError):
    pass


# -- solver ----------------------------------------------------------------

class SolverError(SynthError):
    pass


class SolverSpawnError(SolverError):
    pass


class SolverProtocolError(SolverError):
    pass


class SolverTimeout(SolverError):
    pass


# -- booleanization / synthesis ---------------------------------------------

class AbstractionAborted(SynthError):
    """The solver answered unknown (or timed out) during Booleanization."""


class StateSpaceTooLarge(SynthError):
    pass


class NotRealizable(SynthError):
    """Raised when a controller is requested for a losing game.

    ``trap`` holds the partition indices the environment plays to force a
    violation, and ``witnesses`` one concrete input per partition in ``trap``
    (empty when the game was built without partition witnesses).
    """

    def __init__(self, trap, witnesses=()):
        self.trap = list(trap)
        self.witnesses = list(witnesses)
        super().__init__(f"specification is unrealizable; environment trap: {self.trap}")


# -- runtime ------------------------------------------------------------------

class AbstractionIncomplete(SynthError):
    pass


class ProviderUnsat(SynthError):
    pass


class PolicyError(ContractViolation):
    pass


class OptimizationCapped(UserWarning):
    """min/max search hit the probing cap; the best value found so far is used."""


class WindowTooSmall(SynthError):
    pass
