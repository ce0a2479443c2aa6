import logging
from typing import Tuple

import numpy as np

from exceptions import ParameterOutOfRangeError
from models.measure import SignedMeasure

logger = logging.getLogger(__name__)


class MeasureManager:
    """Manager for signed measures on finite spaces"""

    def jordan_decompose(self, nu: SignedMeasure) -> Tuple[SignedMeasure, SignedMeasure]:
        """
        Split nu into mutually singular nonnegative parts

        Args:
            nu: Signed measure

        Returns:
            (plus, minus) with nu = plus - minus exactly
        """
        mass = nu.mass
        plus = np.where(mass > 0, mass, 0.0)
        minus = np.where(mass < 0, -mass, 0.0)
        return SignedMeasure(nu.space, plus), SignedMeasure(nu.space, minus)

    def is_balanced(self, nu: SignedMeasure, tol: float) -> bool:
        """True iff |nu(K)| <= tol"""
        if tol < 0:
            raise ParameterOutOfRangeError(f"tol must be >= 0, got {tol}", {'tol': tol})
        return abs(nu.total()) <= tol

    def finite_support_truncate(self, mu: SignedMeasure, eps: float) -> SignedMeasure:
        """
        Zero every mass with |m| < eps

        Args:
            mu: Measure to truncate
            eps: Threshold, eps >= 0

        Returns:
            Truncated measure; the KR distance to mu is at most the dropped
            total variation times max(1, diam)
        """
        if eps < 0:
            raise ParameterOutOfRangeError(f"eps must be >= 0, got {eps}", {'eps': eps})
        keep = np.abs(mu.mass) >= eps
        truncated = SignedMeasure(mu.space, np.where(keep, mu.mass, 0.0))
        logger.debug("Truncation dropped %d masses", int((~keep & (mu.mass != 0)).sum()))
        return truncated

    def dropped_bound(self, mu: SignedMeasure, truncated: SignedMeasure) -> float:
        """A-priori KR bound (sum of dropped |m|) * max(1, diam)"""
        return (mu - truncated).tv() * max(1.0, mu.space.diam)
