"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can map it to
an exit status and artifacts can record it.
"""


class PolyakovError(Exception):
    code = "error"

    def __init__(self, message="", **data):
        super().__init__(message or self.code)
        self.data = data


class ValidationError(PolyakovError):
    code = "validation-error"


class UnsupportedGenus(ValidationError):
    code = "unsupported-genus"


class InvalidParameter(ValidationError):
    code = "invalid-parameter"


class NotASurfaceGroup(ValidationError):
    code = "not-a-surface-group"


class OutsideConvergenceDomain(ValidationError):
    code = "outside-convergence-domain"


class OutOfCertifiedRange(ValidationError):
    code = "out-of-certified-range"


class NotHyperbolic(ValidationError):
    code = "not-hyperbolic"


class InvalidModulus(ValidationError):
    code = "invalid-modulus"


class InvalidDegree(ValidationError):
    code = "invalid-degree"


class TowerMismatch(ValidationError):
    code = "tower-mismatch"


class DisconnectedCover(ValidationError):
    code = "disconnected-cover"


class IncompleteSpectrum(ValidationError):
    code = "incomplete-spectrum"


class BudgetExceeded(PolyakovError):
    code = "budget-exceeded"


class IncompleteDomain(PolyakovError):
    """Raised when the word cutoff is too small to close the Dirichlet domain.

    ``achieved_area`` is the hyperbolic area of the (possibly non-compact)
    polygon obtained so far; ``inf`` when it reaches the ideal boundary.
    """

    code = "incomplete-domain"

    def __init__(self, message="", achieved_area=float("inf"), **data):
        super().__init__(message, achieved_area=achieved_area, **data)
        self.achieved_area = achieved_area


class UncertifiedSpectrum(PolyakovError):
    code = "uncertified-spectrum"

    def __init__(self, message="", partial=None, **data):
        super().__init__(message, **data)
        self.partial = partial


class UnstableEstimate(PolyakovError):
    code = "unstable-estimate"


class InsufficientTruncation(PolyakovError):
    code = "insufficient-truncation"


class UnreliableGram(PolyakovError):
    code = "unreliable-gram"


class DegenerateBasis(PolyakovError):
    code = "degenerate-basis"


class SolverFailure(PolyakovError):
    code = "solver-failure"


class FitFailure(PolyakovError):
    code = "fit-failure"


class HomologyRankFailure(PolyakovError):
    code = "homology-rank-failure"


class StarOperatorInconsistency(PolyakovError):
    code = "star-operator-inconsistency"


class InternalError(PolyakovError):
    code = "internal-error"
