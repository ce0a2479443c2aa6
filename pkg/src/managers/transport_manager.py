import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from config import BALANCE_TOL
from exceptions import KRLipException, NotBalancedError, UnexpectedError
from managers.measure_manager import MeasureManager
from models.enums import ConstraintSense
from models.field import ScalarField
from models.measure import SignedMeasure
from models.metric_space import FiniteMetricSpace
from models.reports import DualCertificate
from models.transport import KRResult, LPProblem, TransportPlan
from services.lp_solver import SimplexSolver

logger = logging.getLogger(__name__)


def _arc_index(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Ordered pairs (i, j), i != j, in row-major order"""
    rows, cols = np.nonzero(~np.eye(n, dtype=bool))
    return rows, cols


def _balance_matrix(n: int, tails: np.ndarray, heads: np.ndarray) -> np.ndarray:
    """Row F of the balance condition: +1 on arcs leaving F, -1 on arcs entering F"""
    A = np.zeros((n, tails.size))
    arcs = np.arange(tails.size)
    A[tails, arcs] = 1.0
    A[heads, arcs] = -1.0
    return A


class TransportManager:
    """Manager for Kantorovich–Rubinstein norms and their LP certificates"""

    def __init__(self, solver: Optional[SimplexSolver] = None,
                 measure_manager: Optional[MeasureManager] = None):
        """
        Initialize manager

        Args:
            solver: LP solver shared by all norm computations
            measure_manager: Jordan decomposition and balance checks
        """
        self.solver = solver or SimplexSolver()
        self.measure_manager = measure_manager or MeasureManager()

    def solve_lp(self, problem: LPProblem):
        """Solve an LP with the configured solver"""
        solution = self.solver.solve(problem)
        return solution.value, solution.x, solution.dual

    def kr0_norm(self, space: FiniteMetricSpace, nu: SignedMeasure) -> KRResult:
        """
        Norm of a balanced measure by optimal transfer (balance condition)

        Args:
            space: Underlying metric space
            nu: Measure with nu(K) = 0

        Returns:
            KRResult with optimal plan, zero residual and a 1-Lipschitz
            potential normalised to vanish at the first point

        Raises:
            NotBalancedError: If |nu(K)| > BALANCE_TOL
        """
        self._require_balanced(nu)
        if not nu.mass.any():
            return self._zero_result(space, balanced_only=True)

        tails, heads = _arc_index(space.n)
        # spread the sub-tolerance imbalance so the equality system is consistent
        b = nu.mass - nu.total() / space.n
        problem = LPProblem(
            c=space.dist[tails, heads],
            A=_balance_matrix(space.n, tails, heads),
            senses=(ConstraintSense.EQ,) * space.n,
            b=b
        )
        solution = self.solver.solve(problem)
        plan = self._plan_from(space, tails, heads, solution.x)
        potential = solution.dual - solution.dual[0]
        result = KRResult(
            primal_value=plan.cost(),
            plan=plan,
            residual=SignedMeasure.zero(space),
            dual_value=float(solution.dual @ b),
            potential=ScalarField(space, potential),
            balanced_only=True
        )
        logger.info("kr0 norm %.12g (gap %.3g, %d pivots)",
                    result.primal_value, result.gap, solution.iterations)
        return result

    def kr_norm(self, space: FiniteMetricSpace, mu: SignedMeasure) -> KRResult:
        """
        Norm of a general measure: min over plans psi and residuals r of
        sum rho * psi + |r|(K), with r = mu - induced(psi)

        Args:
            space: Underlying metric space
            mu: Any signed measure

        Returns:
            KRResult; the potential satisfies f(x) - f(y) <= rho(x, y) and |f| <= 1
        """
        if not mu.mass.any():
            return self._zero_result(space, balanced_only=False)

        n = space.n
        tails, heads = _arc_index(n)
        eye = np.eye(n)
        problem = LPProblem(
            c=np.concatenate([space.dist[tails, heads], np.ones(2 * n)]),
            A=np.hstack([_balance_matrix(n, tails, heads), eye, -eye]),
            senses=(ConstraintSense.EQ,) * n,
            b=mu.mass
        )
        solution = self.solver.solve(problem)
        plan = self._plan_from(space, tails, heads, solution.x[:tails.size])
        residual = mu - plan.induced()
        result = KRResult(
            primal_value=plan.cost() + residual.tv(),
            plan=plan,
            residual=residual,
            dual_value=float(solution.dual @ mu.mass),
            potential=ScalarField(space, solution.dual),
            balanced_only=False,
            capped_pairs=self._capped_pairs(space, mu)
        )
        logger.info("kr norm %.12g (gap %.3g, %d pivots)",
                    result.primal_value, result.gap, solution.iterations)
        return result

    def restricted_plan_norm(self, space: FiniteMetricSpace, nu: SignedMeasure) -> float:
        """
        Transport cost with fixed marginals: plans carry nu+ onto nu-

        Raises:
            NotBalancedError: If |nu(K)| > BALANCE_TOL
        """
        self._require_balanced(nu)
        plus, minus = self.measure_manager.jordan_decompose(nu)
        sources = plus.support()
        sinks = minus.support()
        if sources.size == 0 or sinks.size == 0:
            return 0.0
        supply = plus.mass[sources]
        demand = minus.mass[sinks] * (supply.sum() / minus.mass[sinks].sum())

        n_src, n_snk = sources.size, sinks.size
        A = np.zeros((n_src + n_snk, n_src * n_snk))
        for a in range(n_src):
            A[a, a * n_snk:(a + 1) * n_snk] = 1.0
        for k in range(n_snk):
            A[n_src + k, k::n_snk] = 1.0
        problem = LPProblem(
            c=space.dist[np.ix_(sources, sinks)].ravel(),
            A=A,
            senses=(ConstraintSense.EQ,) * (n_src + n_snk),
            b=np.concatenate([supply, demand])
        )
        return self.solver.solve(problem).value

    def kr_batch(self, space: FiniteMetricSpace, measures: Sequence[SignedMeasure],
                 jobs: int = 1) -> List[Union[KRResult, KRLipException]]:
        """
        kr_norm over independent instances; failures are returned in place

        Args:
            space: Shared space
            measures: Measures on that space
            jobs: Worker threads; instances are independent

        Returns:
            One KRResult or the raised exception per measure, in input order
        """
        def run_one(mu: SignedMeasure) -> Union[KRResult, KRLipException]:
            try:
                return self.kr_norm(space, mu)
            except KRLipException as e:
                logger.warning("Batch item failed: %s", e)
                return e
            except Exception as e:
                logger.exception("Batch item crashed")
                return UnexpectedError(f"{type(e).__name__}: {e}", {'type': type(e).__name__})

        if jobs <= 1:
            return [run_one(mu) for mu in measures]
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_one, measures))

    def dual_certificate(self, space: FiniteMetricSpace, mu: SignedMeasure,
                         potential: ScalarField, tol: float = 1e-9) -> DualCertificate:
        """Check max{[f]_1, |f|_inf} <= 1; a feasible f gives f @ mu <= ||mu||"""
        f = potential.value
        lipschitz_excess = (f[:, None] - f[None, :] - space.dist).max() if space.n else 0.0
        sup_excess = np.abs(f).max() - 1.0 if space.n else 0.0
        violation = float(max(lipschitz_excess, sup_excess, 0.0))
        return DualCertificate(
            feasible=violation <= tol,
            value=float(f @ mu.mass),
            max_violation=violation
        )

    def _require_balanced(self, nu: SignedMeasure) -> None:
        if not self.measure_manager.is_balanced(nu, BALANCE_TOL):
            raise NotBalancedError(
                f"Measure has total mass {nu.total():.3g}", {'total': nu.total()}
            )

    @staticmethod
    def _plan_from(space: FiniteMetricSpace, tails: np.ndarray, heads: np.ndarray,
                   x: np.ndarray) -> TransportPlan:
        flow = np.zeros((space.n, space.n))
        flow[tails, heads] = np.clip(x, 0.0, None)
        return TransportPlan(space, flow)

    @staticmethod
    def _capped_pairs(space: FiniteMetricSpace, mu: SignedMeasure) -> Tuple[Tuple[int, int], ...]:
        support = np.flatnonzero(mu.mass)
        sub = space.dist[np.ix_(support, support)]
        rows, cols = np.nonzero(np.triu(sub > 2.0, k=1))
        return tuple((int(support[i]), int(support[j])) for i, j in zip(rows, cols))

    @staticmethod
    def _zero_result(space: FiniteMetricSpace, balanced_only: bool) -> KRResult:
        return KRResult(
            primal_value=0.0,
            plan=TransportPlan.empty(space),
            residual=SignedMeasure.zero(space),
            dual_value=0.0,
            potential=ScalarField.constant(space, 0.0),
            balanced_only=balanced_only
        )
