import logging
from typing import Optional, Tuple

import numpy as np

from exceptions import BadKindError, NTooSmallError, ParameterOutOfRangeError
from managers.metric_manager import MetricManager
from models.enums import SpaceKind
from models.metric_space import MetricMeasureSpace

logger = logging.getLogger(__name__)


def trial_rngs(seed: int, count: int) -> Tuple[np.random.Generator, ...]:
    """Independent PCG64 streams, one per trial, split from a single seed"""
    return tuple(np.random.default_rng(child)
                 for child in np.random.SeedSequence(seed).spawn(count))


def cantor_endpoints(k: int) -> np.ndarray:
    """Endpoints of the 2^k level-k middle-thirds intervals of [0,1], ascending"""
    scale = 3 ** k
    intervals = [(0, scale)]
    for _ in range(k):
        split = []
        for a, b in intervals:
            third = (b - a) // 3
            split.append((a, a + third))
            split.append((b - third, b))
        intervals = split
    ends = sorted({e for interval in intervals for e in interval})
    return np.array(ends, dtype=float) / scale


class SpaceGenerator:
    """Seeded example spaces with uniform weights"""

    def __init__(self, metric_manager: Optional[MetricManager] = None):
        self.metric_manager = metric_manager or MetricManager()

    def generate(self, kind, n: int, seed: int = 0,
                 alpha: Optional[float] = None) -> MetricMeasureSpace:
        """
        Generate an example space

        Args:
            kind: SpaceKind or its string value
            n: Size parameter (points, lattice target, or 2^k intervals for cantor)
            seed: Seed for random-euclidean
            alpha: Optional snowflake exponent

        Returns:
            Space with uniform weights 1/n_points

        Raises:
            BadKindError: If kind is unknown
            NTooSmallError: If n < 1
            ParameterOutOfRangeError: If a cantor n is not a power of two
        """
        kind = self._kind(kind)
        if n < 1:
            raise NTooSmallError(f"n must be >= 1, got {n}", {'n': n})

        if kind is SpaceKind.GRID1D:
            coords = np.linspace(0.0, 1.0, n)[:, None]
        elif kind is SpaceKind.GRID2D:
            side = int(np.ceil(np.sqrt(n)))
            axis = np.linspace(0.0, 1.0, side)
            xs, ys = np.meshgrid(axis, axis, indexing='ij')
            coords = np.column_stack([xs.ravel(), ys.ravel()])
        elif kind is SpaceKind.CANTOR:
            k = int(round(np.log2(n)))
            if 2 ** k != n:
                raise ParameterOutOfRangeError(
                    f"cantor needs n = 2^k intervals, got {n}", {'n': n}
                )
            coords = cantor_endpoints(k)[:, None]
        else:
            coords = np.random.default_rng(seed).random((n, 2))

        space = self.metric_manager.from_coordinates(coords, alpha=alpha)
        logger.info("Generated %s space with %d points", kind.value, space.n)
        return MetricMeasureSpace.uniform(space)

    @staticmethod
    def _kind(kind) -> SpaceKind:
        if isinstance(kind, SpaceKind):
            return kind
        try:
            return SpaceKind(kind)
        except ValueError:
            raise BadKindError(
                f"Unknown space kind: {kind}",
                {'kind': str(kind), 'allowed': [k.value for k in SpaceKind]}
            ) from None
