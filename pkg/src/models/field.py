from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np

from models.metric_space import FiniteMetricSpace


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Real value per point: Lipschitz/Hölder functions, potentials, gradients"""
    space: FiniteMetricSpace
    value: np.ndarray

    def __post_init__(self):
        arr = np.array(self.value, dtype=float)
        if arr.shape != (self.space.n,):
            raise ValueError(
                f"Field of shape {arr.shape} does not match {self.space.n} points"
            )
        arr.setflags(write=False)
        object.__setattr__(self, 'value', arr)

    @classmethod
    def constant(cls, space: FiniteMetricSpace, c: float) -> 'ScalarField':
        return cls(space, np.full(space.n, float(c)))

    def sup_norm(self) -> float:
        return float(np.abs(self.value).max()) if self.value.size else 0.0

    def __add__(self, other: 'ScalarField') -> 'ScalarField':
        return ScalarField(self.space, self.value + other.value)

    def __sub__(self, other: 'ScalarField') -> 'ScalarField':
        return ScalarField(self.space, self.value - other.value)

    def __mul__(self, factor: float) -> 'ScalarField':
        return ScalarField(self.space, self.value * factor)

    __rmul__ = __mul__

    def __neg__(self) -> 'ScalarField':
        return ScalarField(self.space, -self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {'value': {p: float(v) for p, v in zip(self.space.points, self.value)}}

    @classmethod
    def from_dict(cls, space: FiniteMetricSpace, data: Dict[str, Any]) -> 'ScalarField':
        """Create field from dictionary; omitted points default to 0"""
        value = np.zeros(space.n)
        for point, v in data.get('value', {}).items():
            value[space.index(str(point))] = float(v)
        return cls(space, value)


@dataclass(frozen=True)
class OperatorIndex:
    """Index (x, y, z) of the operator L_{x,y,z}, with x != y"""
    x: int
    y: int
    z: int

    def __post_init__(self):
        if self.x == self.y:
            raise ValueError("OperatorIndex requires x != y")


@dataclass(frozen=True)
class ModulusProfile:
    """Hölder modulus sampled on a decreasing schedule of scales"""
    deltas: Tuple[float, ...]
    omega: Tuple[float, ...]

    @property
    def estimate(self) -> float:
        """Distance estimate: the modulus at the smallest scale"""
        return self.omega[-1]

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.deltas, self.omega))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'deltas': list(self.deltas),
            'omega': list(self.omega),
            'estimate': self.estimate
        }
