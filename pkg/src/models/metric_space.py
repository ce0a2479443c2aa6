from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from exceptions import NonpositiveWeightError


def _frozen(values: Any) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Finite metric space: point ids plus a symmetric distance matrix.

    Instances are only built through ``ValidationService``/``MetricManager``,
    which check the metric axioms before construction.
    """
    points: Tuple[str, ...]
    dist: np.ndarray
    diam: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'points', tuple(str(p) for p in self.points))
        object.__setattr__(self, 'dist', _frozen(self.dist))
        diam = float(self.dist.max()) if self.dist.size else 0.0
        object.__setattr__(self, 'diam', diam)

    @property
    def n(self) -> int:
        return len(self.points)

    def index(self, point: str) -> int:
        """Index of a point id; raises KeyError when unknown"""
        try:
            return self._index_map()[point]
        except KeyError:
            raise KeyError(point) from None

    def _index_map(self) -> Dict[str, int]:
        cache = self.__dict__.get('_index_cache')
        if cache is None:
            cache = {p: i for i, p in enumerate(self.points)}
            object.__setattr__(self, '_index_cache', cache)
        return cache

    def realized_distances(self, rtol: float = 1e-12) -> np.ndarray:
        """Sorted distinct positive distances.

        Values within rtol of each other (rounding noise of computed distances)
        are merged into one radius, the largest of the cluster, so that closed
        balls at a merged radius contain every point of the cluster.
        """
        if self.n < 2:
            return np.empty(0)
        values = np.unique(self.dist[~np.eye(self.n, dtype=bool)])
        gaps = np.diff(values) > rtol * (1.0 + values[1:])
        last_of_cluster = np.append(gaps, True)
        return values[last_of_cluster]

    def to_dict(self) -> Dict[str, Any]:
        """Convert space to dictionary"""
        return {
            'points': list(self.points),
            'dist': self.dist.tolist()
        }

    def __repr__(self) -> str:
        return f"FiniteMetricSpace(n={self.n}, diam={self.diam:.6g})"


@dataclass(frozen=True, eq=False)
class MetricMeasureSpace:
    """Finite metric space carrying a fully supported measure"""
    space: FiniteMetricSpace
    weight: np.ndarray

    def __post_init__(self):
        weight = _frozen(self.weight)
        bad = np.flatnonzero(~(np.isfinite(weight) & (weight > 0)))
        if bad.size:
            i = int(bad[0])
            raise NonpositiveWeightError(
                f"Weight of point {self.space.points[i]} must be positive and finite, got {weight[i]}",
                {'point': self.space.points[i], 'weight': float(weight[i])}
            )
        object.__setattr__(self, 'weight', weight)

    @classmethod
    def uniform(cls, space: FiniteMetricSpace) -> 'MetricMeasureSpace':
        return cls(space, np.full(space.n, 1.0 / max(space.n, 1)))

    def ball_masses(self) -> np.ndarray:
        """Matrix of closed-ball masses: entry [x, y] = mu(B_{rho(x,y)}(x))"""
        n = self.space.n
        out = np.empty((n, n))
        for x in range(n):
            row = self.space.dist[x]
            order = np.argsort(row, kind='stable')
            sorted_row = row[order]
            cumulative = np.cumsum(self.weight[order])
            # closed ball: all points at distance <= r, ties included
            last = np.searchsorted(sorted_row, row, side='right') - 1
            out[x] = cumulative[last]
        return out

    def ball_mass(self, x: int, r: float) -> float:
        return float(self.weight[self.space.dist[x] <= r].sum())

    def total_mass(self) -> float:
        return float(self.weight.sum())

    def to_dict(self) -> Dict[str, Any]:
        data = self.space.to_dict()
        data['weight'] = self.weight.tolist()
        return data

    def __repr__(self) -> str:
        return f"MetricMeasureSpace(n={self.space.n}, mass={self.total_mass():.6g})"


@dataclass(frozen=True)
class NetHierarchy:
    """Nested greedy nets A_0 ⊆ A_1 ⊆ ... with radii r0 * 2^-n"""
    space: FiniteMetricSpace = field(repr=False)
    levels: Tuple[Tuple[int, ...], ...]
    radii: Tuple[float, ...]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level_ids(self, n: int) -> List[str]:
        return [self.space.points[i] for i in self.levels[n]]

    def covering_radius(self, n: int) -> float:
        """Largest distance from a point of the space to levels[n]"""
        centers = list(self.levels[n])
        return float(self.space.dist[:, centers].min(axis=1).max())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'radii': list(self.radii),
            'levels': [self.level_ids(n) for n in range(len(self.levels))]
        }


def points_or_default(points: Optional[Sequence[Any]], n: int) -> Tuple[str, ...]:
    """Point ids as strings, defaulting to '0'..'n-1'"""
    if points is None:
        return tuple(str(i) for i in range(n))
    return tuple(str(p) for p in points)
