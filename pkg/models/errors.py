"""
Exceptions raised by the reconstruction pipeline.
"""

from typing import Optional


class QrmError(Exception):
    """Base class for numerical failures of the pipeline."""


class BasisError(QrmError):
    """Gram-Schmidt met a numerically dependent function."""

    def __init__(self, index: int, pivot: float):
        self.index = index
        self.pivot = pivot
        super().__init__(
            f"Gram-Schmidt pivot {pivot:.3e} for function {index} is below tolerance; "
            f"the truncation order is too large for the time partition"
        )


class ForwardSolveError(QrmError):
    """A backward Euler step did not reach the required residual."""

    def __init__(self, step: int, residual: float):
        self.step = step
        self.residual = residual
        super().__init__(f"Forward step {step} stopped at relative residual {residual:.3e}")


class SolverError(QrmError):
    """The least-squares solver did not converge."""

    def __init__(self, message: str, residual: float, iterations: Optional[int] = None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual {residual:.3e}, iterations {iterations})")


class StageError(QrmError):
    """A pipeline stage failed; the original exception is chained as __cause__."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"Stage '{stage}' failed: {message}")
