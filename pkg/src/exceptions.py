from typing import Any, Dict, Optional


class KRLipException(Exception):
    """Base exception for the krlip toolkit"""
    code = "Error"

    def __init__(self, message: str, detail: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.detail = detail or {}

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable error object"""
        return {'code': self.code, 'detail': {'message': str(self), **self.detail}}


class DomainError(KRLipException):
    """Raised when inputs violate the mathematical preconditions of an operation"""
    code = "DomainError"


class StorageError(KRLipException):
    """Raised on file read/write failures or malformed documents"""
    code = "StorageError"


class ValidationError(DomainError):
    """Raised when validation fails"""
    code = "ValidationError"


class NotSquareMatrixError(ValidationError):
    code = "NotSquareMatrix"


class NegativeEntryError(ValidationError):
    code = "NegativeEntry"


class NonzeroDiagonalError(ValidationError):
    code = "NonzeroDiagonal"


class AsymmetricMatrixError(ValidationError):
    code = "AsymmetricMatrix"


class ZeroOffDiagonalError(ValidationError):
    code = "ZeroOffDiagonal"


class TriangleViolationError(ValidationError):
    """Raised when dist[i][k] > dist[i][j] + dist[j][k]"""
    code = "TriangleViolation"

    def __init__(self, i: int, j: int, k: int, excess: float):
        super().__init__(
            f"Triangle inequality violated on ({i},{k}) via {j} by {excess:.3g}",
            {'i': i, 'j': j, 'k': k, 'excess': excess}
        )
        self.i = i
        self.j = j
        self.k = k


class AlphaOutOfRangeError(ValidationError):
    code = "AlphaOutOfRange"


class POutOfRangeError(ValidationError):
    code = "POutOfRange"


class SOutOfRangeError(ValidationError):
    code = "SOutOfRange"


class ExponentViolationError(ValidationError):
    """Raised when p <= Q/s for the Morrey and L-infinity estimates"""
    code = "ExponentViolation"


class EmptyScheduleError(ValidationError):
    code = "EmptySchedule"


class ParameterOutOfRangeError(ValidationError):
    code = "ParameterOutOfRange"


class BadKindError(ValidationError):
    code = "BadKind"


class NTooSmallError(ValidationError):
    code = "NTooSmall"


class NonpositiveWeightError(ValidationError):
    """Raised when a reference measure has a zero, negative or non-finite weight"""
    code = "NonpositiveWeight"


class NotBalancedError(DomainError):
    code = "NotBalanced"


class DegenerateFitError(DomainError):
    code = "DegenerateFit"


class DegenerateDiameterError(DomainError):
    code = "DegenerateDiameter"


class ConstantTooSmallError(DomainError):
    code = "ConstantTooSmall"


class ReconstructionMismatchError(DomainError):
    code = "ReconstructionMismatch"


class SolverError(DomainError):
    """Raised when the LP solver cannot return an optimum"""
    code = "SolverError"


class InfeasibleError(SolverError):
    code = "Infeasible"


class UnboundedError(SolverError):
    code = "Unbounded"


class IterationLimitError(SolverError):
    code = "IterationLimit"


class EntityNotFoundError(DomainError):
    """Raised when a referenced entity is not found"""
    code = "EntityNotFound"


class UnknownPointError(EntityNotFoundError):
    code = "UnknownPoint"


class UnexpectedError(KRLipException):
    """Wraps a failure that none of the typed errors describe"""
    code = "Unexpected"
