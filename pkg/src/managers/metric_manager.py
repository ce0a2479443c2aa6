import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from exceptions import DegenerateFitError, ParameterOutOfRangeError
from models.metric_space import (
    FiniteMetricSpace, MetricMeasureSpace, NetHierarchy, points_or_default
)
from services.validation_service import ValidationService

logger = logging.getLogger(__name__)


def greedy_cover(dist: np.ndarray, members: np.ndarray, radius: float,
                 centers: Sequence[int] = ()) -> List[int]:
    """
    Farthest-point greedy cover of ``members`` by closed balls of ``radius``

    Args:
        dist: Full distance matrix
        members: Indices to be covered; new centers are drawn from them
        radius: Ball radius
        centers: Centers already in place

    Returns:
        Newly added centers, in insertion order. Without prior centers the
        lowest index comes first; ties in distance go to the lowest index.
    """
    members = np.asarray(members, dtype=int)
    if members.size == 0:
        return []
    if len(centers):
        gap = dist[np.ix_(members, list(centers))].min(axis=1)
    else:
        gap = np.full(members.size, np.inf)
    added: List[int] = []
    while True:
        uncovered = gap > radius
        if not uncovered.any():
            return added
        # members are sorted, so argmax picks the lowest index among ties
        pick = int(np.argmax(gap))
        center = int(members[pick])
        added.append(center)
        gap = np.minimum(gap, dist[center, members])


class MetricManager:
    """Manager for finite metric spaces, nets and doubling estimates"""

    def __init__(self, validation_service: Optional[ValidationService] = None):
        """
        Initialize manager

        Args:
            validation_service: Metric axiom checker
        """
        self.validation_service = validation_service or ValidationService()

    def validate_metric(self, dist, points: Optional[Sequence[str]] = None,
                        check_triangle: bool = True) -> FiniteMetricSpace:
        """
        Build a space from a distance matrix after checking the metric axioms

        Args:
            dist: Square matrix of nonnegative reals
            points: Point ids (default '0'..'n-1')
            check_triangle: Skip only for matrices that are metrics by construction

        Returns:
            Validated FiniteMetricSpace

        Raises:
            ValidationError: The first violated axiom (NotSquareMatrix,
                NegativeEntry, NonzeroDiagonal, AsymmetricMatrix,
                ZeroOffDiagonal, TriangleViolation)
        """
        dist = np.asarray(dist, dtype=float)
        result = self.validation_service.validate_metric(dist, check_triangle=check_triangle)
        result.raise_first()
        ids = points_or_default(points, dist.shape[0])
        if len(ids) != dist.shape[0] or len(set(ids)) != len(ids):
            raise ParameterOutOfRangeError(
                "Point ids must be unique and match the matrix size",
                {'points': len(ids), 'size': dist.shape[0]}
            )
        # symmetrize away sub-tolerance asymmetry
        dist = 0.5 * (dist + dist.T)
        np.fill_diagonal(dist, 0.0)
        return FiniteMetricSpace(ids, dist)

    def from_coordinates(self, coords, points: Optional[Sequence[str]] = None,
                         alpha: Optional[float] = None) -> FiniteMetricSpace:
        """Euclidean distances of coordinate rows, optionally snowflaked"""
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        space = self.validate_metric(
            cdist(coords, coords), points, check_triangle=False
        )
        if alpha is not None:
            space = self.snowflake(space, alpha)
        return space

    def snowflake(self, space: FiniteMetricSpace, alpha: float) -> FiniteMetricSpace:
        """
        Entrywise rho^alpha

        Raises:
            AlphaOutOfRangeError: If alpha is outside (0,1]
        """
        self.validation_service.validate_alpha(alpha).raise_first()
        if alpha == 1.0:
            return space
        return self.validate_metric(
            np.power(space.dist, alpha), space.points, check_triangle=False
        )

    def build_net_hierarchy(self, space: FiniteMetricSpace, depth: int,
                            r0: float) -> NetHierarchy:
        """
        Nested greedy nets with covering radii r0 * 2^-n, n = 0..depth

        Raises:
            ParameterOutOfRangeError: If depth < 0 or r0 <= 0
        """
        if depth < 0 or r0 <= 0:
            raise ParameterOutOfRangeError(
                f"Need depth >= 0 and r0 > 0, got depth={depth}, r0={r0}",
                {'depth': depth, 'r0': r0}
            )
        members = np.arange(space.n)
        centers: List[int] = []
        levels = []
        radii = []
        for level in range(depth + 1):
            radius = r0 * 2.0 ** (-level)
            centers = centers + greedy_cover(space.dist, members, radius, centers)
            levels.append(tuple(centers))
            radii.append(radius)
        logger.info("Net hierarchy: depth %d, finest level has %d centers",
                    depth, len(levels[-1]))
        return NetHierarchy(space=space, levels=tuple(levels), radii=tuple(radii))

    def estimate_doubling_constant(self, space: FiniteMetricSpace) -> int:
        """
        Upper-bound the doubling constant by greedy half-radius covers

        Every ball B_r(x), for every center x and every realized distance r,
        is covered greedily by balls of radius r/2 centered in the ball.
        The largest cover size is returned; it bounds, but need not equal,
        the minimal-cover constant.
        """
        radii = space.realized_distances()
        best = 1
        for x in range(space.n):
            row = space.dist[x]
            for r in radii:
                ball = np.flatnonzero(row <= r)
                if ball.size <= best:
                    continue
                best = max(best, len(greedy_cover(space.dist, ball, 0.5 * r)))
        logger.info("Doubling estimate %d over %d radii", best, radii.size)
        return best

    def estimate_measure_doubling(self, mm: MetricMeasureSpace) -> float:
        """Largest ratio mu(B_2r(x)) / mu(B_r(x)) over centers and realized radii"""
        radii = mm.space.realized_distances()
        best = 1.0
        for x in range(mm.space.n):
            row = mm.space.dist[x]
            for r in radii:
                inner = mm.weight[row <= r].sum()
                outer = mm.weight[row <= 2.0 * r].sum()
                best = max(best, float(outer / inner))
        return best

    def fit_lower_mass_bound(self, mm: MetricMeasureSpace,
                             q_single_scale: float = 1.0) -> Tuple[float, float]:
        """
        Fit (C, Q) with mu(B_r(x)) >= C r^Q on every realized ball

        Q is the least-squares slope of log mu against log r, taken at the
        binding (smallest-mass) center of each realized radius. C is then the
        largest constant certifying the inequality on all pairs (x, r).
        With a single realized radius the slope is unidentified and Q
        defaults to ``q_single_scale``.

        Raises:
            DegenerateFitError: If the space has no positive distance
        """
        radii = mm.space.realized_distances()
        radii = radii[radii <= mm.space.diam]
        if radii.size == 0:
            raise DegenerateFitError(
                "Lower mass bound needs at least two distinct points"
            )
        masses = self._ball_masses_at(mm, radii)
        binding = masses.min(axis=0)
        if radii.size == 1:
            q = q_single_scale
        else:
            q = float(np.polyfit(np.log(radii), np.log(binding), 1)[0])
            q = max(q, 1e-6)
        c = float((binding / radii ** q).min())
        logger.info("Lower mass bound fit: C=%.6g Q=%.6g over %d radii", c, q, radii.size)
        return c, q

    @staticmethod
    def _ball_masses_at(mm: MetricMeasureSpace, radii: np.ndarray) -> np.ndarray:
        """Matrix [x, k] = mu(B_{radii[k]}(x))"""
        n = mm.space.n
        out = np.empty((n, radii.size))
        for x in range(n):
            row = mm.space.dist[x]
            order = np.argsort(row, kind='stable')
            cumulative = np.cumsum(mm.weight[order])
            last = np.searchsorted(row[order], radii, side='right') - 1
            out[x] = cumulative[last]
        return out
