"""Exception hierarchy with stable machine-readable codes.

Every error carries a ``code`` string (used verbatim in CLI JSON output and
exit-status mapping) so scripts can dispatch without parsing messages.
"""

from __future__ import annotations

# Exit statuses used by the CLI: 2 = bad input, 3 = internal check failure.
EXIT_INPUT_ERROR = 2
EXIT_CHECK_FAILURE = 3


class BmapqError(Exception):
    """Base class for all package errors."""

    code = "Error"
    exit_status = EXIT_INPUT_ERROR

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class ModelError(BmapqError):
    """Model definition rejected during validation."""


class NonGeneratorError(ModelError):
    code = "NonGenerator"


class ReducibleError(ModelError):
    code = "Reducible"


class NoArrivalsError(ModelError):
    code = "NoArrivals"


class BadPmfError(ModelError):
    code = "BadPmf"


class SolveFailedError(BmapqError):
    code = "SolveFailed"
    exit_status = EXIT_CHECK_FAILURE


class CapTooSmallError(BmapqError):
    code = "CapTooSmall"


class NumericalFailureError(BmapqError):
    code = "NumericalFailure"
    exit_status = EXIT_CHECK_FAILURE


class NotStableError(BmapqError):
    code = "NotStable"


class DivergentDriftError(BmapqError):
    code = "DivergentDrift"


class NoSuchKError(BmapqError):
    code = "NoSuchK"
    exit_status = EXIT_CHECK_FAILURE


class CertificateFailedError(BmapqError):
    code = "CertificateFailed"
    exit_status = EXIT_CHECK_FAILURE


class HorizonNonpositiveError(BmapqError):
    code = "HorizonNonpositive"


class OrderingViolatedError(BmapqError):
    code = "OrderingViolated"
    exit_status = EXIT_CHECK_FAILURE


class CouplingInfeasibleError(BmapqError):
    """Per-customer coupling would require materializing an absurd batch."""

    code = "CouplingInfeasible"


class MulticlassViewError(BmapqError):
    """Operation needs a single service rate but the view is multiclass."""

    code = "MulticlassView"


class InputError(BmapqError):
    """CLI-level input problem (missing file, malformed JSON, schema violation)."""

    code = "InputError"
