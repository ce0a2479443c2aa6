from typing import Optional

import numpy as np

from exceptions import AlphaOutOfRangeError, ParameterOutOfRangeError
from models.field import ScalarField
from models.measure import SignedMeasure
from models.metric_space import FiniteMetricSpace


class FieldGenerator:
    """Seeded random fields and measures for property trials"""

    def midpoint_displacement(self, space: FiniteMetricSpace, alpha: float,
                              rng: np.random.Generator) -> ScalarField:
        """
        Hölder-alpha sample path on a dyadic 1-D grid

        Points are taken in index order as 2^K + 1 equispaced nodes. Both
        endpoints start at 0; level k sets each new midpoint to the mean of
        its neighbours plus a uniform displacement in [-2^{-alpha k}, 2^{-alpha k}].

        Raises:
            AlphaOutOfRangeError: If alpha is outside (0,1]
            ParameterOutOfRangeError: If the space size is not 2^K + 1
        """
        if not 0.0 < alpha <= 1.0:
            raise AlphaOutOfRangeError(f"alpha must lie in (0,1], got {alpha}",
                                       {'alpha': alpha})
        levels = int(round(np.log2(max(space.n - 1, 1))))
        if space.n < 2 or 2 ** levels + 1 != space.n:
            raise ParameterOutOfRangeError(
                f"Midpoint displacement needs 2^K + 1 points, got {space.n}",
                {'n': space.n}
            )
        value = np.zeros(space.n)
        step = space.n - 1
        for k in range(1, levels + 1):
            half = step // 2
            mids = np.arange(half, space.n, step)
            amplitude = 2.0 ** (-alpha * k)
            value[mids] = (0.5 * (value[mids - half] + value[mids + half])
                           + amplitude * rng.uniform(-1.0, 1.0, mids.size))
            step = half
        return ScalarField(space, value)

    def random_lipschitz(self, space: FiniteMetricSpace, rng: np.random.Generator,
                         constant: float = 1.0, anchors: Optional[int] = None) -> ScalarField:
        """Lower envelope min_j (v_j + L rho(x, a_j)) over random anchors: [f]_1 <= L"""
        count = anchors or max(1, min(space.n, 5))
        picks = rng.choice(space.n, size=count, replace=False)
        heights = rng.uniform(-1.0, 1.0, count)
        envelope = heights[None, :] + constant * space.dist[:, picks]
        return ScalarField(space, envelope.min(axis=1))

    def random_field(self, space: FiniteMetricSpace, rng: np.random.Generator,
                     scale: float = 1.0) -> ScalarField:
        return ScalarField(space, rng.uniform(-scale, scale, space.n))

    def random_measure(self, space: FiniteMetricSpace, rng: np.random.Generator,
                       balanced: bool = False, density: float = 1.0) -> SignedMeasure:
        """Gaussian masses on a random support; balanced measures are re-centred"""
        mass = rng.normal(size=space.n)
        if density < 1.0:
            mass[rng.random(space.n) >= density] = 0.0
        if balanced:
            support = np.flatnonzero(mass)
            if support.size:
                mass[support] -= mass[support].mean()
        return SignedMeasure(space, mass)
