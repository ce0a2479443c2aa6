import logging
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from exceptions import (
    ConstantTooSmallError, DegenerateDiameterError, EmptyScheduleError,
    ParameterOutOfRangeError
)
from models.field import ModulusProfile, OperatorIndex, ScalarField
from models.metric_space import FiniteMetricSpace
from models.reports import AssumptionHReport, OperatorBoundsReport
from services.validation_service import ValidationService

logger = logging.getLogger(__name__)

# Pair scans are done in row blocks of about this many matrix entries.
_BLOCK_ENTRIES = 1 << 22


def _row_blocks(n: int) -> Iterator[slice]:
    step = max(1, _BLOCK_ENTRIES // max(n, 1))
    for start in range(0, n, step):
        yield slice(start, min(n, start + step))


def _pair_quotients(space: FiniteMetricSpace, values: np.ndarray,
                    alpha: float) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (distances, |f(x)-f(y)|/rho^alpha) per row block; the diagonal is masked to -inf"""
    for rows in _row_blocks(space.n):
        dist = space.dist[rows]
        diff = np.abs(values[rows, None] - values[None, :])
        with np.errstate(divide='ignore', invalid='ignore'):
            quotient = diff / np.power(dist, alpha)
        quotient[dist == 0] = -np.inf
        yield dist, quotient


class LipschitzManager:
    """Manager for Hölder norms, the little-Lipschitz distance and the L_{x,y,z} family"""

    def __init__(self, validation_service: Optional[ValidationService] = None):
        self.validation_service = validation_service or ValidationService()

    def holder_seminorm(self, space: FiniteMetricSpace, f: ScalarField, alpha: float) -> float:
        """
        [f]_alpha = max over x != y of |f(x)-f(y)| / rho(x,y)^alpha

        Raises:
            AlphaOutOfRangeError: If alpha is outside (0,1]
        """
        self.validation_service.validate_alpha(alpha).raise_first()
        best = 0.0
        for _, quotient in _pair_quotients(space, f.value, alpha):
            if quotient.size:
                best = max(best, float(quotient.max()))
        return best

    def holder_norm(self, space: FiniteMetricSpace, f: ScalarField, alpha: float) -> float:
        """||f||_alpha = max{[f]_alpha, ||f||_inf}"""
        return max(self.holder_seminorm(space, f, alpha), f.sup_norm())

    def lip_modulus(self, space: FiniteMetricSpace, f: ScalarField, alpha: float,
                    delta: float) -> float:
        """Sup of the Hölder quotient over pairs with 0 < rho <= delta (0 if none)"""
        return self.dist_to_little_lip(space, f, alpha, [delta]).omega[0]

    def dist_to_little_lip(self, space: FiniteMetricSpace, f: ScalarField, alpha: float,
                           schedule: Sequence[float]) -> ModulusProfile:
        """
        Modulus profile over a strictly decreasing schedule of scales

        The last entry estimates dist(f, lip) = limsup of the quotient as
        rho -> 0; on a fixed finite space that limit is degenerate, so the
        estimate is indexed by the smallest scale.

        Raises:
            EmptyScheduleError: If the schedule is empty
            ParameterOutOfRangeError: If it is not positive and strictly decreasing
        """
        self.validation_service.validate_alpha(alpha).raise_first()
        deltas = np.asarray(list(schedule), dtype=float)
        if deltas.size == 0:
            raise EmptyScheduleError("Delta schedule is empty")
        if np.any(deltas <= 0) or np.any(np.diff(deltas) >= 0):
            raise ParameterOutOfRangeError(
                "Delta schedule must be positive and strictly decreasing",
                {'schedule': deltas.tolist()}
            )
        omega = np.zeros(deltas.size)
        for dist, quotient in _pair_quotients(space, f.value, alpha):
            for k, delta in enumerate(deltas):
                admissible = quotient[dist <= delta]
                if admissible.size:
                    omega[k] = max(omega[k], float(admissible.max()))
        logger.info("Modulus profile over %d scales, estimate %.6g", deltas.size, omega[-1])
        return ModulusProfile(deltas=tuple(deltas.tolist()), omega=tuple(omega.tolist()))

    def operator_eval(self, space: FiniteMetricSpace, f: ScalarField,
                      idx: OperatorIndex) -> Tuple[float, float]:
        """
        L_{x,y,z} f = ((f(x)-f(y))/rho(x,y), rho(x,y) f(z) / D)

        Raises:
            DegenerateDiameterError: On a single-point space
        """
        diam = self._require_diameter(space)
        rho = space.dist[idx.x, idx.y]
        values = f.value
        return (
            float((values[idx.x] - values[idx.y]) / rho),
            float((rho / diam) * values[idx.z])
        )

    @staticmethod
    def operator_norm(pair: Tuple[float, float]) -> float:
        """Max norm on R x R"""
        return max(abs(pair[0]), abs(pair[1]))

    def operator_sup(self, space: FiniteMetricSpace, f: ScalarField) -> float:
        """
        Exhaustive max over all (x, y, z) of ||L_{x,y,z} f||; equals
        max{[f]_1, ||f||_inf}

        Raises:
            DegenerateDiameterError: On a single-point space
        """
        diam = self._require_diameter(space)
        difference, scale = self._operator_parts(space, f, diam)
        best = float(difference.max())
        magnitude = np.abs(f.value)
        for z in range(space.n):
            best = max(best, float((scale * magnitude[z]).max()))
        return best

    def operator_bounds_check(self, space: FiniteMetricSpace,
                              f: ScalarField) -> OperatorBoundsReport:
        """Worst slack of the two-sided bound on ||L_{x,y,z} f|| over all triples"""
        diam = self._require_diameter(space)
        difference, scale = self._operator_parts(space, f, diam)
        sup = f.sup_norm()
        magnitude = np.abs(f.value)
        lower = np.inf
        upper = np.inf
        for z in range(space.n):
            norm = np.maximum(difference, scale * magnitude[z])
            lower = min(lower, float((norm - difference).min()))
            upper = min(upper, float((difference + scale * sup - norm).min()))
        return OperatorBoundsReport(
            lower_slack=lower, upper_slack=upper, triples=space.n ** 2 * (space.n - 1)
        )

    def extend_lipschitz(self, space: FiniteMetricSpace, subset: Sequence[int],
                         values: Sequence[float], constant: float) -> ScalarField:
        """
        Clamped McShane extension of values given on a subset

        Args:
            space: Underlying space
            subset: Point indices of A
            values: f on A, aligned with subset
            constant: Lipschitz constant L of the extension

        Returns:
            g with g|A = values exactly, [g]_1 <= L and ||g||_inf <= max |values|

        Raises:
            ConstantTooSmallError: If L is below the Lipschitz constant of the data
        """
        subset = np.asarray(subset, dtype=int)
        values = np.asarray(values, dtype=float)
        if subset.size == 0 or subset.size != values.size:
            raise ParameterOutOfRangeError(
                "Extension needs a nonempty subset with one value per point"
            )
        needed = self._restricted_lipschitz(space, subset, values)
        if constant < needed * (1.0 - 1e-12):
            raise ConstantTooSmallError(
                f"L = {constant} is below the Lipschitz constant {needed} of the data",
                {'L': constant, 'required': needed}
            )
        cone = values[None, :] + constant * space.dist[:, subset]
        g = np.clip(cone.min(axis=1), values.min(), values.max())
        g[subset] = values
        return ScalarField(space, g)

    def assumption_h_report(self, space: FiniteMetricSpace, f: ScalarField, alpha: float,
                            subset: Sequence[int], constant: float,
                            net_radius: Optional[float] = None) -> AssumptionHReport:
        """
        Extend f|A with its own rho-Lipschitz constant and compare Hölder norms

        Args:
            space: Underlying space
            f: Field in Lip_alpha
            alpha: Hölder exponent
            subset: Nonempty index set A
            constant: C > 1
            net_radius: When A is an r-net, also report [f]_a r^a + L r

        Returns:
            AssumptionHReport with ratio ||g||_alpha / ||f||_alpha
        """
        subset = np.asarray(subset, dtype=int)
        if subset.size == 0 or constant <= 1.0:
            raise ParameterOutOfRangeError(
                "Need a nonempty subset and C > 1", {'C': constant}
            )
        data = f.value[subset]
        lip = self._restricted_lipschitz(space, subset, data)
        g = self.extend_lipschitz(space, subset, data, lip)
        f_norm = self.holder_norm(space, f, alpha)
        g_norm = self.holder_norm(space, g, alpha)
        ratio = g_norm / f_norm if f_norm > 0 else 0.0
        net_bound = None
        if net_radius is not None:
            net_bound = (self.holder_seminorm(space, f, alpha) * net_radius ** alpha
                         + lip * net_radius)
        report = AssumptionHReport(
            extension=g,
            lipschitz_constant=lip,
            f_norm=f_norm,
            g_norm=g_norm,
            ratio=ratio,
            constant=constant,
            holds=g_norm <= constant * f_norm,
            sup_error=float(np.abs(f.value - g.value).max()),
            net_radius=net_radius,
            net_error_bound=net_bound
        )
        logger.info("Extension ratio %.6g (C=%g)", ratio, constant)
        return report

    @staticmethod
    def _restricted_lipschitz(space: FiniteMetricSpace, subset: np.ndarray,
                              values: np.ndarray) -> float:
        if subset.size < 2:
            return 0.0
        dist = space.dist[np.ix_(subset, subset)]
        off = ~np.eye(subset.size, dtype=bool)
        diff = np.abs(values[:, None] - values[None, :])
        return float((diff[off] / dist[off]).max())

    @staticmethod
    def _require_diameter(space: FiniteMetricSpace) -> float:
        if space.n < 2 or space.diam <= 0:
            raise DegenerateDiameterError(
                "Operators L_{x,y,z} need at least two points"
            )
        return space.diam

    @staticmethod
    def _operator_parts(space: FiniteMetricSpace, f: ScalarField,
                        diam: float) -> Tuple[np.ndarray, np.ndarray]:
        """|f(x)-f(y)|/rho and rho/D over ordered pairs x != y"""
        off = ~np.eye(space.n, dtype=bool)
        dist = space.dist[off]
        difference = np.abs(f.value[:, None] - f.value[None, :])[off] / dist
        return difference, dist / diam
