"""Exception types shared by all modules.

Every error carries a short machine-readable ``code`` so the command line
front end can report failures as JSON.
"""


class AxiError(Exception):
    code = "error"

    def to_dict(self):
        return {"error": self.code, "message": str(self)}


class UndersampledField(AxiError):
    code = "undersampled_field"


class ZeroVector(AxiError):
    code = "zero_vector"


class NegativeCount(AxiError):
    code = "negative_count"


class EmptySpec(AxiError):
    code = "empty_spec"


class InvalidInput(AxiError, ValueError):
    code = "invalid_input"


class DegenerateWeight(AxiError):
    code = "degenerate_weight"


class BadInterval(AxiError):
    code = "bad_interval"


class NonCompactSupport(AxiError):
    code = "non_compact_support"


class QuadratureNotConverged(AxiError):
    code = "quadrature_not_converged"


class PointOnZero(AxiError):
    code = "point_on_zero"


class WindingMismatch(AxiError):
    code = "winding_mismatch"


class SeriesNotDecaying(AxiError):
    code = "series_not_decaying"


class OutOfRange(AxiError):
    code = "out_of_range"


class EmptyFeasibleRegion(AxiError):
    code = "empty_feasible_region"


class SingularNormMatrix(AxiError):
    code = "singular_norm_matrix"


class StepSizeUnderflow(AxiError):
    code = "step_size_underflow"


class BlowUp(AxiError):
    code = "blow_up"


class NoEigenvalueFound(AxiError):
    code = "no_eigenvalue_found"


class LinearSolveFailed(AxiError):
    code = "linear_solve_failed"


class NotConverged(AxiError):
    code = "not_converged"

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class DivergingIteration(AxiError):
    code = "diverging_iteration"

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class LargeCurl(AxiError):
    code = "large_curl"


class PositivityViolated(AxiError):
    code = "positivity_violated"


class DegenerateSystem(AxiError):
    code = "degenerate_system"


class NoisyFit(AxiError):
    code = "noisy_fit"
