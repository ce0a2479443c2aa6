import logging
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from config import CLARKSON_RTOL, DESCENT_RTOL
from exceptions import ExponentViolationError, POutOfRangeError, SOutOfRangeError
from managers.lipschitz_manager import LipschitzManager
from models.besov import BesovParams, HajlaszResult
from models.enums import ConstraintSense
from models.field import ScalarField
from models.metric_space import MetricMeasureSpace
from models.reports import ClarksonReport, MorreyReport, RatioReport
from models.transport import LPProblem
from services.lp_solver import SimplexSolver

logger = logging.getLogger(__name__)


class BesovManager:
    """Manager for discrete Besov and Hajłasz seminorms and the embedding checks"""

    def __init__(self, solver: Optional[SimplexSolver] = None,
                 lipschitz_manager: Optional[LipschitzManager] = None):
        """
        Initialize manager

        Args:
            solver: LP solver for the p = 1 Hajłasz program
            lipschitz_manager: Hölder norms for the Lip -> Besov check
        """
        self.solver = solver or SimplexSolver()
        self.lipschitz_manager = lipschitz_manager or LipschitzManager()

    # -- Besov -------------------------------------------------------------

    def besov_seminorm(self, mm: MetricMeasureSpace, f: ScalarField,
                       params: BesovParams) -> float:
        """
        Double-sum seminorm

            ( sum_{x != y} |f(x)-f(y)|^p mu(x) mu(y) / (rho^{sp} mu(B_rho(x))) )^{1/p}

        with closed balls B_rho(x) of radius rho = rho(x, y).
        """
        self._check_params(params)
        return self._besov_sum(mm, f.value, params) ** (1.0 / params.p)

    def besov_norm(self, mm: MetricMeasureSpace, f: ScalarField, params: BesovParams) -> float:
        """Discrete L^p norm plus the seminorm"""
        return self.lp_norm(mm, f.value, params.p) + self.besov_seminorm(mm, f, params)

    @staticmethod
    def lp_norm(mm: MetricMeasureSpace, values: np.ndarray, p: float) -> float:
        return float((np.abs(values) ** p @ mm.weight) ** (1.0 / p))

    def clarkson_check(self, mm: MetricMeasureSpace, f: ScalarField, g: ScalarField,
                       params: BesovParams) -> ClarksonReport:
        """
        ||(f+g)/2||'^p + ||(f-g)/2||'^p <= (||f||'^p + ||g||'^p) / 2
        with ||h||'^p = ||h||_p^p + [h]^p

        Raises:
            POutOfRangeError: If p <= 2
        """
        self._check_params(params)
        if params.p <= 2:
            raise POutOfRangeError(
                f"Clarkson inequality needs p > 2, got {params.p}", {'p': params.p}
            )

        def primed(values: np.ndarray) -> float:
            return float(np.abs(values) ** params.p @ mm.weight) + self._besov_sum(mm, values, params)

        lhs = primed(0.5 * (f.value + g.value)) + primed(0.5 * (f.value - g.value))
        rhs = 0.5 * (primed(f.value) + primed(g.value))
        return ClarksonReport(lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1.0 + CLARKSON_RTOL))

    # -- Hajłasz -----------------------------------------------------------

    def hajlasz_seminorm_p1(self, mm: MetricMeasureSpace, f: ScalarField,
                            s: float) -> HajlaszResult:
        """
        Optimal L^1 Hajłasz s-gradient

        Solves min sum g mu subject to g >= 0 and g(x) + g(y) >= |f(x)-f(y)| / rho^s
        through its dual (pair multipliers capped by mu), whose simplex
        multipliers are the optimal gradient.

        Raises:
            SOutOfRangeError: If s is outside (0,1]
        """
        if not 0.0 < s <= 1.0:
            raise SOutOfRangeError(f"s must lie in (0,1], got {s}", {'s': s})
        space = mm.space
        demand = self._pair_demands(mm, f.value, s)
        rows, cols = np.nonzero(np.triu(demand > 0))
        if rows.size == 0:
            return HajlaszResult(ScalarField.constant(space, 0.0), 0.0, 1.0, s)

        incidence = np.zeros((space.n, rows.size))
        pairs = np.arange(rows.size)
        incidence[rows, pairs] = 1.0
        incidence[cols, pairs] = 1.0
        solution = self.solver.solve(LPProblem(
            c=-demand[rows, cols],
            A=incidence,
            senses=(ConstraintSense.LE,) * space.n,
            b=mm.weight
        ))
        g = self._restore_feasibility(demand, np.clip(-solution.dual, 0.0, None))
        value = float(g @ mm.weight)
        logger.info("Hajlasz p=1 seminorm %.12g (LP value %.12g)", value, -solution.value)
        return HajlaszResult(ScalarField(space, g), value, 1.0, s, certified=True)

    def hajlasz_upper_bound(self, mm: MetricMeasureSpace, f: ScalarField, s: float,
                            p: float) -> HajlaszResult:
        """
        Feasible s-gradient with small L^p norm: an upper bound on [f]_{H^{s,p}}

        Starts from the p = 1 optimiser, refines it with SLSQP on the convex
        L^p program, then runs cyclic coordinate lowering until the relative
        improvement falls below DESCENT_RTOL.

        Raises:
            POutOfRangeError: If p < 1
        """
        if p < 1:
            raise POutOfRangeError(f"p must be >= 1, got {p}", {'p': p})
        start = self.hajlasz_seminorm_p1(mm, f, s)
        if p == 1 or start.seminorm == 0.0:
            return HajlaszResult(start.gradient, start.seminorm, p, s, certified=(p == 1))

        demand = self._pair_demands(mm, f.value, s)
        candidates = [self._coordinate_descent(mm, demand, start.gradient.value, p)]
        refined = self._slsqp(mm, demand, start.gradient.value, p)
        if refined is not None:
            candidates.append(self._coordinate_descent(mm, demand, refined, p))
        g = min(candidates, key=lambda v: float(v ** p @ mm.weight))
        bound = self.lp_norm(mm, g, p)
        logger.info("Hajlasz upper bound p=%g: %.12g", p, bound)
        return HajlaszResult(ScalarField(mm.space, g), bound, p, s, certified=False)

    def morrey_check(self, mm: MetricMeasureSpace, f: ScalarField, result: HajlaszResult,
                     s: float, p: float, constant: float, q: float) -> MorreyReport:
        """
        Smallest C with |f(x)-f(y)| <= C rho^{s-Q/p} ||g||_p on all pairs

        Raises:
            ExponentViolationError: If p <= Q/s
        """
        self._check_exponent(s, p, q)
        exponent = s - q / p
        g_norm = self.lp_norm(mm, result.gradient.value, p)
        off = ~np.eye(mm.space.n, dtype=bool)
        diff = np.abs(f.value[:, None] - f.value[None, :])[off]
        if not diff.any():
            c_star = 0.0
        elif g_norm == 0.0:
            c_star = float('inf')
        else:
            c_star = float((diff / (mm.space.dist[off] ** exponent * g_norm)).max())
        return MorreyReport(
            minimal_constant=c_star, constant=constant, holds=c_star <= constant,
            exponent=exponent, gradient_norm=g_norm
        )

    # -- embeddings ----------------------------------------------------------

    def linfty_embedding_check(self, mm: MetricMeasureSpace, fields: Sequence[ScalarField],
                               s: float, p: float, q: float) -> RatioReport:
        """
        Ratios ||f||_inf / (||f||_p + Hajłasz bound) over a family of fields

        Raises:
            ExponentViolationError: If p <= Q/s
        """
        self._check_exponent(s, p, q)
        ratios = []
        for f in fields:
            sup = f.sup_norm()
            if sup == 0.0:
                ratios.append(0.0)
                continue
            bound = self.hajlasz_upper_bound(mm, f, s, p).seminorm
            ratios.append(sup / (self.lp_norm(mm, f.value, p) + bound))
        return RatioReport(ratios=tuple(ratios))

    def embedding_ratio_lip_besov(self, mm: MetricMeasureSpace, fields: Sequence[ScalarField],
                                  alpha: float, params: BesovParams) -> RatioReport:
        """
        Ratios [f]_B / ||f||_alpha against the ceiling k of the embedding proof

        The discrete ceiling is k^p = sum_{x != y} min(rho^alpha, 2)^p rho^{-sp}
        mu(x) mu(y) / mu(B_rho(x)), split into the scale-bounded part
        (rho^alpha <= 2) and the tail; every ratio is at most k.

        Raises:
            SOutOfRangeError: If s >= alpha
        """
        self._check_params(params)
        if params.s >= alpha:
            raise SOutOfRangeError(
                f"Need s < alpha, got s={params.s}, alpha={alpha}",
                {'s': params.s, 'alpha': alpha}
            )
        s, p = params.s, params.p
        space = mm.space
        off = ~np.eye(space.n, dtype=bool)
        rho = space.dist[off]
        weights = (np.outer(mm.weight, mm.weight) / mm.ball_masses())[off]
        near = rho ** alpha <= 2.0
        scale_term = float((rho[near] ** ((alpha - s) * p) * weights[near]).sum())
        tail_term = float((2.0 ** p * rho[~near] ** (-s * p) * weights[~near]).sum())
        ceiling = (scale_term + tail_term) ** (1.0 / p)

        diam = space.diam
        integral = (diam ** ((alpha - s) * p) / ((alpha - s) * p)
                    + 2.0 ** p * diam ** (-s * p) / (s * p)) ** (1.0 / p) if diam > 0 else 0.0

        ratios = []
        for f in fields:
            norm = self.lipschitz_manager.holder_norm(space, f, alpha)
            ratios.append(self.besov_seminorm(mm, f, params) / norm if norm > 0 else 0.0)
        return RatioReport(
            ratios=tuple(ratios),
            ceiling=ceiling,
            extras={'scale_term': scale_term, 'tail_term': tail_term,
                    'integral_ceiling': integral}
        )

    def besov_to_hajlasz_check(self, mm: MetricMeasureSpace, fields: Sequence[ScalarField],
                               s: float, p: float) -> RatioReport:
        """Ratios of the Hajłasz upper bound to the Besov seminorm (0 when both vanish)"""
        params = BesovParams(s=s, p=p)
        self._check_params(params)
        ratios = []
        for f in fields:
            besov = self.besov_seminorm(mm, f, params)
            if besov == 0.0:
                ratios.append(0.0)
                continue
            ratios.append(self.hajlasz_upper_bound(mm, f, s, p).seminorm / besov)
        return RatioReport(ratios=tuple(ratios))

    # -- helpers -------------------------------------------------------------

    @staticmethod
    def _check_params(params: BesovParams) -> None:
        if not 0.0 < params.s < 1.0:
            raise SOutOfRangeError(f"s must lie in (0,1), got {params.s}", {'s': params.s})
        if params.p < 1.0:
            raise POutOfRangeError(f"p must be >= 1, got {params.p}", {'p': params.p})

    @staticmethod
    def _check_exponent(s: float, p: float, q: float) -> None:
        if p <= q / s:
            raise ExponentViolationError(
                f"Need p > Q/s, got p={p}, Q/s={q / s:.6g}", {'p': p, 'Q': q, 's': s}
            )

    @staticmethod
    def _besov_sum(mm: MetricMeasureSpace, values: np.ndarray, params: BesovParams) -> float:
        n = mm.space.n
        if n < 2:
            return 0.0
        off = ~np.eye(n, dtype=bool)
        rho = mm.space.dist[off]
        diff = np.abs(values[:, None] - values[None, :])[off]
        weights = (np.outer(mm.weight, mm.weight) / mm.ball_masses())[off]
        return float((diff ** params.p / rho ** (params.s * params.p) * weights).sum())

    @staticmethod
    def _pair_demands(mm: MetricMeasureSpace, values: np.ndarray, s: float) -> np.ndarray:
        """Symmetric matrix |f(x)-f(y)| / rho^s with zero diagonal"""
        dist = mm.space.dist
        diff = np.abs(values[:, None] - values[None, :])
        demand = np.zeros_like(dist)
        off = dist > 0
        demand[off] = diff[off] / dist[off] ** s
        return demand

    @staticmethod
    def _restore_feasibility(demand: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Raise g(x) by its worst pair deficit so every pair constraint holds"""
        deficit = demand - g[:, None] - g[None, :]
        np.fill_diagonal(deficit, 0.0)
        return g + np.clip(deficit.max(axis=1), 0.0, None)

    @staticmethod
    def _coordinate_descent(mm: MetricMeasureSpace, demand: np.ndarray, g: np.ndarray,
                            p: float) -> np.ndarray:
        """Cyclic lowering of each g(x) to max(0, max_y demand(x,y) - g(y))"""
        g = g.copy()
        objective = float(g ** p @ mm.weight)
        masked = demand.copy()
        np.fill_diagonal(masked, -np.inf)
        while True:
            for x in range(g.size):
                g[x] = max(0.0, float((masked[x] - g).max()))
            updated = float(g ** p @ mm.weight)
            if objective - updated <= DESCENT_RTOL * max(objective, 1e-300):
                return g
            objective = updated

    def _slsqp(self, mm: MetricMeasureSpace, demand: np.ndarray, g0: np.ndarray,
               p: float) -> Optional[np.ndarray]:
        rows, cols = np.nonzero(np.triu(demand > 0))
        jacobian = np.zeros((rows.size, g0.size))
        pairs = np.arange(rows.size)
        jacobian[pairs, rows] = 1.0
        jacobian[pairs, cols] = 1.0
        targets = demand[rows, cols]
        weight = mm.weight

        result = minimize(
            lambda g: float(np.abs(g) ** p @ weight),
            g0,
            jac=lambda g: p * np.abs(g) ** (p - 1.0) * np.sign(g) * weight,
            method='SLSQP',
            bounds=[(0.0, None)] * g0.size,
            constraints=[{
                'type': 'ineq',
                'fun': lambda g: jacobian @ g - targets,
                'jac': lambda g: jacobian
            }],
            options={'maxiter': 500, 'ftol': 1e-14}
        )
        if not np.all(np.isfinite(result.x)):
            logger.warning("SLSQP refinement failed: %s", result.message)
            return None
        return self._restore_feasibility(demand, np.clip(result.x, 0.0, None))
