"""
Error hierarchy for the Weil-Petersson lab.

Every error carries the process exit code the CLI reports for it.
"""

EXIT_PASS = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_THEOREM_FAIL = 3
EXIT_INCONCLUSIVE = 4


class WPError(Exception):
    """Base class for all lab errors"""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


# ---- Usage / parameter errors ----
class ParameterError(WPError, ValueError):
    exit_code = EXIT_USAGE


class DomainError(WPError, ValueError):
    """Interval or window outside the sampled grid"""
    exit_code = EXIT_USAGE


class RangeError(WPError, ValueError):
    exit_code = EXIT_USAGE


class ConfigValidationError(WPError, ValueError):
    exit_code = EXIT_USAGE


class ParseError(WPError, ValueError):
    """Malformed input file; `line` is 1-based when known"""
    exit_code = EXIT_USAGE

    def __init__(self, message: str, line: int = None, **details):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, line=line, **details)
        self.line = line


# ---- Numerical errors ----
class InvariantViolation(WPError):
    pass


class DegenerateChordError(WPError):
    pass


class NotBeltramiError(WPError):
    pass


class KernelScaleError(WPError):
    pass


class ConstructionError(WPError):
    """Raised when a constructed map fails its certificate"""

    def __init__(self, message: str, ratios=None, **details):
        super().__init__(message, ratios=ratios, **details)
        self.ratios = ratios


class DegenerateJacobianError(WPError):
    pass


class NotQuasiconformalError(WPError):
    pass


class NotJordanError(WPError):
    pass


class ResolutionError(WPError):
    pass


class NumericalFailure(WPError):
    pass


class UnwrappingError(WPError):
    pass


class CompositionDegeneracyError(WPError):
    pass


class OutOfNeighborhoodError(WPError):
    pass
