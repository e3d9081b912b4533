# src/errors.py
"""Exception hierarchy. Every error carries the CLI exit code it maps to."""


class PathMedError(Exception):
    """Base class for all analysis errors."""

    exit_code = 1


class InputError(PathMedError):
    """Bad input files, model text or columns."""

    exit_code = 3


class AnalysisError(PathMedError):
    """Numerical failure during estimation."""

    exit_code = 1


class ParameterError(PathMedError, ValueError):
    """Invalid argument supplied by the caller."""

    exit_code = 2


# --- model language -------------------------------------------------------


class ModelSyntaxError(InputError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DuplicatePathError(InputError):
    pass


class CycleError(InputError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("model is not recursive: " + " -> ".join(self.cycle))


class CovarianceOnEndogenousError(InputError):
    pass


class EmptyModelError(InputError):
    pass


# --- data -----------------------------------------------------------------


class DataIoError(InputError):
    pass


class MissingColumnError(InputError):
    def __init__(self, name):
        super().__init__(f"column '{name}' not found in data")
        self.name = name


class HeaderError(InputError):
    pass


class DataParseError(InputError):
    def __init__(self, row, column, token):
        super().__init__(f"non-numeric value {token!r} at row {row}, column {column}")
        self.row = row
        self.column = column
        self.token = token


class TooFewRowsError(InputError):
    def __init__(self, n, required=3):
        super().__init__(f"need at least {required} complete rows, got {n}")
        self.n = n
        self.required = required


# --- estimation -----------------------------------------------------------


class RankDeficientError(AnalysisError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DegenerateColumnError(AnalysisError):
    def __init__(self, name):
        super().__init__(f"column '{name}' has zero variance")
        self.name = name


class NotPositiveDefiniteError(AnalysisError):
    pass


class NonConvergenceError(AnalysisError):
    def __init__(self, iterations, gradient_norm, message=""):
        super().__init__(
            f"optimizer did not converge after {iterations} iterations "
            f"(gradient norm {gradient_norm:.3g}) {message}".strip()
        )
        self.iterations = iterations
        self.gradient_norm = gradient_norm


class UnderIdentifiedError(AnalysisError):
    def __init__(self, df):
        super().__init__(f"model is under-identified (df = {df})")
        self.df = df


class ZeroSeError(AnalysisError):
    pass


class AllResamplesDegenerateError(AnalysisError):
    pass


class AllReplicationsDegenerateError(AnalysisError):
    pass


# --- parameters -----------------------------------------------------------


class InvalidAlphaError(ParameterError):
    pass


class InvalidLevelError(ParameterError):
    pass


class TooFewReplicatesError(ParameterError):
    pass


class TooFewDrawsError(ParameterError):
    pass


class InvalidDesignError(ParameterError):
    pass
