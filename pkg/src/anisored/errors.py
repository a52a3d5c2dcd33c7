"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to:

====  ==========================================================
code  meaning
====  ==========================================================
0     all executed checks passed
2     at least one check failed
3     config could not be parsed or validated
4     singular linear algebra (matrix, 4x4 system, moments)
5     spectral failure (real root, contour, leak, root solver)
6     a model hypothesis is violated
7     a reduction residual or conjugacy check blew up
8     grid / diagnostic failure
9     file I/O failure
70    internal invariant breach (unexpected exception)
====  ==========================================================
"""

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_INTERNAL = 70


class AnisoredError(Exception):
    exit_code = EXIT_INTERNAL


# -- linear algebra (4) -------------------------------------------------------

class SingularMatrix(AnisoredError, ZeroDivisionError):
    exit_code = 4


class SingularSystem(AnisoredError, ZeroDivisionError):
    exit_code = 4


class SpectraNotDisjoint(SingularSystem):
    """Sylvester operands share an eigenvalue, so the solution is not unique."""


class MomentSingular(AnisoredError):
    exit_code = 4


# -- spectral (5) -------------------------------------------------------------

class DegenerateLeadingCoefficient(AnisoredError, ValueError):
    exit_code = 5


class NoConvergence(AnisoredError):
    exit_code = 5


class RealRootDetected(AnisoredError):
    """A characteristic root sits on the real axis: the system is not elliptic there."""
    exit_code = 5


class ContourConstructionFailed(AnisoredError):
    exit_code = 5


class SpectrumLeak(AnisoredError):
    exit_code = 5


# -- hypotheses (6) -----------------------------------------------------------

class HypothesisViolated(AnisoredError):
    exit_code = 6

    def __init__(self, inequality, message=None):
        self.inequality = inequality
        super().__init__(message or f"hypothesis violated: {inequality}")


# -- residuals (7) ------------------------------------------------------------

class QuadraticResidualTooLarge(AnisoredError):
    exit_code = 7


class ConjugacyViolated(AnisoredError):
    exit_code = 7


# -- grid / diagnostics (8) ---------------------------------------------------

class GridTooCoarse(AnisoredError, ValueError):
    exit_code = 8


class AllZeroField(AnisoredError, ValueError):
    exit_code = 8


class WeightOverflowUnavoidable(AnisoredError, OverflowError):
    exit_code = 8


# -- config (3) ---------------------------------------------------------------

class ParseError(AnisoredError, ValueError):
    exit_code = 3

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ValidationError(AnisoredError, ValueError):
    exit_code = 3


class FieldFileError(AnisoredError, OSError):
    exit_code = 9
