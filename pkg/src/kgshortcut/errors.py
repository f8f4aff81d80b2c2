"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so each class carries the code it
should produce.
"""


class KgError(Exception):
    exit_code = 1


class EmptyGraph(KgError):
    exit_code = 2


class ParseError(KgError):
    exit_code = 2

    def __init__(self, line: int, message: str = "", source: str | None = None):
        self.line = line
        self.source = source
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line}: {message or 'malformed triple'}")


class DatasetIOError(KgError, OSError):
    exit_code = 4


class ValidationError(KgError):
    exit_code = 2

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConvergenceError(KgError):
    pass


class InvalidQuery(KgError):
    exit_code = 2


class EmptyEvaluation(KgError):
    exit_code = 2


class DegenerateReport(KgError):
    exit_code = 2


class UndefinedCorrelation(KgError):
    pass


class UndefinedModularity(KgError):
    pass


class SamplingFailed(KgError):
    exit_code = 3


class SplitFailed(SamplingFailed):
    pass


class InsufficientPartitions(SamplingFailed):
    def __init__(self, message, candidate_sizes=()):
        self.candidate_sizes = list(candidate_sizes)
        super().__init__(f"{message}; candidate sizes: {self.candidate_sizes}")
