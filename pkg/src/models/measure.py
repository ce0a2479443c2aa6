from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from models.metric_space import FiniteMetricSpace


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Signed measure on a finite space, stored as a dense mass vector"""
    space: FiniteMetricSpace
    mass: np.ndarray

    def __post_init__(self):
        arr = np.array(self.mass, dtype=float)
        if arr.shape != (self.space.n,):
            raise ValueError(
                f"Mass vector of shape {arr.shape} does not match {self.space.n} points"
            )
        arr.setflags(write=False)
        object.__setattr__(self, 'mass', arr)

    @classmethod
    def zero(cls, space: FiniteMetricSpace) -> 'SignedMeasure':
        return cls(space, np.zeros(space.n))

    @classmethod
    def dirac(cls, space: FiniteMetricSpace, point: str, weight: float = 1.0) -> 'SignedMeasure':
        mass = np.zeros(space.n)
        mass[space.index(point)] = weight
        return cls(space, mass)

    @classmethod
    def dirac_difference(cls, space: FiniteMetricSpace, x: str, y: str) -> 'SignedMeasure':
        """delta_x - delta_y"""
        mass = np.zeros(space.n)
        mass[space.index(x)] += 1.0
        mass[space.index(y)] -= 1.0
        return cls(space, mass)

    def total(self) -> float:
        return float(self.mass.sum())

    def tv(self) -> float:
        """Total variation |nu|(K)"""
        return float(np.abs(self.mass).sum())

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.mass)

    def __add__(self, other: 'SignedMeasure') -> 'SignedMeasure':
        return SignedMeasure(self.space, self.mass + other.mass)

    def __sub__(self, other: 'SignedMeasure') -> 'SignedMeasure':
        return SignedMeasure(self.space, self.mass - other.mass)

    def __mul__(self, factor: float) -> 'SignedMeasure':
        return SignedMeasure(self.space, self.mass * factor)

    __rmul__ = __mul__

    def __neg__(self) -> 'SignedMeasure':
        return SignedMeasure(self.space, -self.mass)

    def to_dict(self) -> Dict[str, Any]:
        """Sparse mapping of nonzero masses"""
        return {
            'mass': {self.space.points[i]: float(self.mass[i]) for i in self.support()}
        }

    @classmethod
    def from_dict(cls, space: FiniteMetricSpace, data: Dict[str, Any]) -> 'SignedMeasure':
        """Create measure from dictionary; omitted points default to 0"""
        mass = np.zeros(space.n)
        for point, value in data.get('mass', {}).items():
            mass[space.index(str(point))] = float(value)
        return cls(space, mass)

    def __repr__(self) -> str:
        return f"SignedMeasure(n={self.space.n}, total={self.total():.6g}, tv={self.tv():.6g})"
