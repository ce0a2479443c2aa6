from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from config import METRIC_TOL
from exceptions import (
    AlphaOutOfRangeError, AsymmetricMatrixError, KRLipException, NegativeEntryError,
    NonzeroDiagonalError, NotSquareMatrixError, TriangleViolationError,
    ZeroOffDiagonalError
)


@dataclass
class ValidationResult:
    """Validation result with errors"""
    valid: bool
    errors: List[KRLipException] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.valid

    def raise_first(self) -> None:
        """Raise the first collected error, if any"""
        if self.errors:
            raise self.errors[0]


class ValidationService:
    """Service for validating distance matrices and numeric parameters"""

    def __init__(self, tol: float = METRIC_TOL):
        self.tol = tol

    def validate_metric(self, dist: np.ndarray, check_triangle: bool = True) -> ValidationResult:
        """
        Validate a candidate distance matrix against the metric axioms

        Args:
            dist: Square matrix of reals
            check_triangle: Run the cubic triangle scan; callers skip it only
                for matrices that are metrics by construction (Euclidean, snowflake)

        Returns:
            ValidationResult; structural failures stop the scan early,
            axiom failures are all collected
        """
        errors: List[KRLipException] = []
        dist = np.asarray(dist, dtype=float)

        # Validate shape
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
            errors.append(NotSquareMatrixError(f"Matrix of shape {dist.shape} is not square"))
            return ValidationResult(valid=False, errors=errors)
        if not np.all(np.isfinite(dist)):
            errors.append(NegativeEntryError("Matrix contains non-finite entries"))
            return ValidationResult(valid=False, errors=errors)

        n = dist.shape[0]
        tol = self.tol

        negative = np.argwhere(dist < 0)
        if negative.size:
            i, j = (int(v) for v in negative[0])
            errors.append(NegativeEntryError(
                f"Negative entry {dist[i, j]} at ({i},{j})", {'i': i, 'j': j}
            ))

        diagonal = np.flatnonzero(np.abs(np.diag(dist)) > tol)
        if diagonal.size:
            i = int(diagonal[0])
            errors.append(NonzeroDiagonalError(
                f"Diagonal entry {dist[i, i]} at {i}", {'i': i}
            ))

        asym = np.argwhere(np.abs(dist - dist.T) > tol)
        if asym.size:
            i, j = (int(v) for v in asym[0])
            errors.append(AsymmetricMatrixError(
                f"dist[{i}][{j}] = {dist[i, j]} differs from dist[{j}][{i}] = {dist[j, i]}",
                {'i': i, 'j': j}
            ))

        off = ~np.eye(n, dtype=bool)
        zero = np.argwhere((dist <= tol) & off)
        if zero.size:
            i, j = (int(v) for v in zero[0])
            errors.append(ZeroOffDiagonalError(
                f"Distinct points {i} and {j} at distance {dist[i, j]}", {'i': i, 'j': j}
            ))

        if check_triangle:
            violation = self._first_triangle_violation(dist)
            if violation is not None:
                errors.append(violation)

        return ValidationResult(valid=len(errors) == 0, errors=errors)

    def _first_triangle_violation(self, dist: np.ndarray) -> Optional[TriangleViolationError]:
        """Scan intermediate points in index order; report the lowest (i, k) pair"""
        for j in range(dist.shape[0]):
            via = dist[:, j, None] + dist[None, j, :]
            excess = dist - via
            bad = np.argwhere(excess > self.tol)
            if bad.size:
                i, k = (int(v) for v in bad[0])
                return TriangleViolationError(i, j, k, float(excess[i, k]))
        return None

    def validate_alpha(self, alpha: float, upper_inclusive: bool = True) -> ValidationResult:
        """Exponent in (0,1] (or (0,1) when upper_inclusive is False)"""
        errors: List[KRLipException] = []
        in_range = 0.0 < alpha <= 1.0 if upper_inclusive else 0.0 < alpha < 1.0
        if not in_range:
            bracket = "]" if upper_inclusive else ")"
            errors.append(AlphaOutOfRangeError(
                f"alpha must lie in (0,1{bracket}, got {alpha}", {'alpha': alpha}
            ))
        return ValidationResult(valid=len(errors) == 0, errors=errors)
