"""Exception hierarchy.

Every error raised by the library derives from :class:`MetricRoundError`.
Input-validation problems derive from :class:`InvalidMetricError` so the CLI
can map them to a distinct exit code; failures of an analysis on a valid
input derive from :class:`AnalysisError`.
"""

from __future__ import annotations


class MetricRoundError(Exception):
    """Base class for all library errors."""

    code = "MetricRoundError"

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class InvalidMetricError(MetricRoundError, ValueError):
    code = "InvalidMetric"


class NotSquare(InvalidMetricError):
    code = "NotSquare"


class AsymmetricEntry(InvalidMetricError):
    code = "AsymmetricEntry"

    def __init__(self, i: int, j: int, delta: float):
        self.i, self.j, self.delta = i, j, delta
        super().__init__(f"dist[{i}][{j}] != dist[{j}][{i}] (difference {delta:.3g})")

    def to_dict(self) -> dict:
        return {**super().to_dict(), "i": self.i, "j": self.j, "delta": self.delta}


class NonzeroDiagonal(InvalidMetricError):
    code = "NonzeroDiagonal"

    def __init__(self, i: int, value: float):
        self.i, self.value = i, value
        super().__init__(f"dist[{i}][{i}] = {value!r} is not zero")

    def to_dict(self) -> dict:
        return {**super().to_dict(), "i": self.i, "value": self.value}


class NonpositiveOffDiagonal(InvalidMetricError):
    code = "NonpositiveOffDiagonal"

    def __init__(self, i: int, j: int, value: float):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"dist[{i}][{j}] = {value!r} must be positive")

    def to_dict(self) -> dict:
        return {**super().to_dict(), "i": self.i, "j": self.j, "value": self.value}


class TriangleViolation(InvalidMetricError):
    code = "TriangleViolation"

    def __init__(self, i: int, j: int, k: int, slack: float):
        self.i, self.j, self.k, self.slack = i, j, k, slack
        super().__init__(
            f"dist[{i}][{k}] exceeds dist[{i}][{j}] + dist[{j}][{k}] by {slack:.6g}"
        )

    def to_dict(self) -> dict:
        return {
            **super().to_dict(),
            "triple": [self.i, self.j, self.k],
            "slack": self.slack,
        }


class TransformNotMetric(InvalidMetricError):
    code = "TransformNotMetric"

    def __init__(self, p: float, triple: tuple[int, int, int], slack: float):
        self.p, self.triple, self.slack = p, triple, slack
        super().__init__(
            f"d^{p:g} breaks the triangle inequality on {triple} (excess {slack:.6g})"
        )

    def to_dict(self) -> dict:
        return {
            **super().to_dict(),
            "p": self.p,
            "triple": list(self.triple),
            "slack": self.slack,
        }


class ParamOutOfRange(MetricRoundError, ValueError):
    code = "ParamOutOfRange"


class TargetOutOfRange(ParamOutOfRange):
    code = "TargetOutOfRange"


class DisconnectedTree(InvalidMetricError):
    code = "DisconnectedTree"


class CycleDetected(InvalidMetricError):
    code = "CycleDetected"


class AnalysisError(MetricRoundError):
    code = "AnalysisError"


class CapReachedNonUltrametric(AnalysisError):
    """Doubling search hit ``p_max`` on a space that is not ultrametric."""

    code = "CapReachedNonUltrametric"

    def __init__(self, p_max: float, ultra_witness, additive_witness, min_eigenvalue: float):
        self.p_max = p_max
        self.ultra_witness = ultra_witness
        self.additive_witness = additive_witness
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"A_p still positive semi-definite at p_max={p_max:g} although the space is "
            f"not ultrametric (witness {ultra_witness}); min eigenvalue {min_eigenvalue:.3g}"
        )

    def to_dict(self) -> dict:
        return {
            **super().to_dict(),
            "p_max": self.p_max,
            "ultra_witness": None if self.ultra_witness is None else list(self.ultra_witness),
            "additive_witness": (
                None if self.additive_witness is None else list(self.additive_witness)
            ),
            "min_eigenvalue": self.min_eigenvalue,
        }


class NotNegativeType(AnalysisError):
    code = "NotNegativeType"

    def __init__(self, p: float, min_eigenvalue: float):
        self.p, self.min_eigenvalue = p, min_eigenvalue
        super().__init__(
            f"space does not have {p:g}-negative type (min eigenvalue {min_eigenvalue:.3g})"
        )

    def to_dict(self) -> dict:
        return {**super().to_dict(), "p": self.p, "min_eigenvalue": self.min_eigenvalue}


class NoKernelVector(AnalysisError):
    code = "NoKernelVector"

    def __init__(self, p: float, min_eigenvalue: float):
        self.p, self.min_eigenvalue = p, min_eigenvalue
        super().__init__(
            f"A_p has no null direction at p={p:.12g} (min eigenvalue {min_eigenvalue:.3g})"
        )

    def to_dict(self) -> dict:
        return {**super().to_dict(), "p": self.p, "min_eigenvalue": self.min_eigenvalue}


class DimensionMismatch(AnalysisError):
    code = "DimensionMismatch"


class WeightSumInvalid(AnalysisError, ValueError):
    code = "WeightSumInvalid"


class IndexOverlap(AnalysisError, ValueError):
    code = "IndexOverlap"
