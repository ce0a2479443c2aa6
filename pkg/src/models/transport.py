from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from models.enums import ConstraintSense
from models.field import ScalarField
from models.measure import SignedMeasure
from models.metric_space import FiniteMetricSpace


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Nonnegative mass per ordered pair: flow[i, j] is carried from i to j"""
    space: FiniteMetricSpace
    flow: np.ndarray

    def __post_init__(self):
        arr = np.array(self.flow, dtype=float)
        if arr.shape != (self.space.n, self.space.n):
            raise ValueError(f"Plan of shape {arr.shape} does not match the space")
        arr.setflags(write=False)
        object.__setattr__(self, 'flow', arr)

    @classmethod
    def empty(cls, space: FiniteMetricSpace) -> 'TransportPlan':
        return cls(space, np.zeros((space.n, space.n)))

    def induced(self) -> SignedMeasure:
        """Balanced measure realised by the plan: outflow minus inflow"""
        return SignedMeasure(self.space, self.flow.sum(axis=1) - self.flow.sum(axis=0))

    def cost(self) -> float:
        return float((self.space.dist * self.flow).sum())

    def arcs(self) -> List[Tuple[int, int, float]]:
        """Arcs with positive flow, ordered by (from, to) index"""
        rows, cols = np.nonzero(self.flow > 0)
        return [(int(i), int(j), float(self.flow[i, j])) for i, j in zip(rows, cols)]

    def to_list(self) -> List[Dict[str, Any]]:
        pts = self.space.points
        return [{'from': pts[i], 'to': pts[j], 'mass': m} for i, j, m in self.arcs()]


@dataclass(frozen=True, eq=False)
class KRResult:
    """Primal/dual solution of a Kantorovich–Rubinstein norm computation"""
    primal_value: float
    plan: TransportPlan
    residual: SignedMeasure
    dual_value: float
    potential: ScalarField
    balanced_only: bool = False
    # support pairs farther apart than 2, where moving mass costs more than creating it
    capped_pairs: Tuple[Tuple[int, int], ...] = ()

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    def to_dict(self) -> Dict[str, Any]:
        pts = self.plan.space.points
        return {
            'primal': self.primal_value,
            'dual': self.dual_value,
            'gap': self.gap,
            'balanced_only': self.balanced_only,
            'plan': self.plan.to_list(),
            'residual': self.residual.to_dict()['mass'],
            'potential': self.potential.to_dict()['value'],
            'capped_pairs': [[pts[i], pts[j]] for i, j in self.capped_pairs]
        }


@dataclass(frozen=True, eq=False)
class LPProblem:
    """min c @ x  s.t.  A[i] @ x (sense[i]) b[i],  lower <= x <= upper

    A lower bound of -inf together with an upper bound of +inf marks a free
    variable.
    """
    c: np.ndarray
    A: np.ndarray
    senses: Tuple[ConstraintSense, ...]
    b: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        A = np.asarray(self.A, dtype=float).reshape(-1, c.size)
        b = np.asarray(self.b, dtype=float).ravel()
        lower = np.zeros(c.size) if self.lower is None else np.asarray(self.lower, dtype=float)
        upper = np.full(c.size, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if A.shape[0] != b.size or len(self.senses) != b.size:
            raise ValueError("Constraint matrix, senses and right-hand side disagree in length")
        if lower.shape != c.shape or upper.shape != c.shape:
            raise ValueError("Bounds must match the number of variables")
        object.__setattr__(self, 'c', c)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'senses', tuple(ConstraintSense(s) for s in self.senses))
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.b.size


@dataclass(frozen=True, eq=False)
class LPSolution:
    """Optimal primal vector and row multipliers (Lagrange sign convention:
    c - A.T @ dual >= 0 on variables at their lower bound)"""
    value: float
    x: np.ndarray
    dual: np.ndarray
    iterations: int = 0
    slackness_residual: float = field(default=0.0)
