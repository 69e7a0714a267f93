"""Exception hierarchy shared by all modules."""


class HistClustError(ValueError):
    """Base class for every error raised by this package."""


class InvalidWidth(HistClustError):
    pass


class InvalidDomain(HistClustError):
    pass


class OutOfDomain(HistClustError):
    pass


class EmptyData(HistClustError):
    pass


class InvalidSup(HistClustError):
    pass


class SampleTooSmall(HistClustError):
    pass


class EmptySet(HistClustError):
    pass


class NotNested(HistClustError):
    pass


class InvalidFamily(HistClustError):
    pass


class ScanExhausted(HistClustError):
    """The scan passed ``rho_max`` before the loop terminated.

    The partial trace is kept on the exception.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class DegenerateInterval(HistClustError):
    pass


class AllCandidatesFailed(HistClustError):
    """No candidate width produced a two-cluster scan."""

    def __init__(self, message, per_delta=()):
        super().__init__(message)
        self.per_delta = list(per_delta)


class InvalidLevel(HistClustError):
    pass


class AboveTop(HistClustError):
    pass


class InvalidEps(HistClustError):
    pass


class NoFeasibleEps(HistClustError):
    pass


class FitUnderdetermined(HistClustError):
    pass


class ConfigError(HistClustError):
    pass
