import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from config import DEFAULT_SOLVER_SETTINGS, SolverSettings
from exceptions import InfeasibleError, IterationLimitError, UnboundedError
from models.enums import ConstraintSense
from models.transport import LPProblem, LPSolution

logger = logging.getLogger(__name__)


@dataclass
class _StandardForm:
    """min cost @ z  s.t.  A z = b, z >= 0, with b >= 0

    Structural column k carries col_sign[k] times original variable col_source[k]
    on top of offset.
    """
    A: np.ndarray
    b: np.ndarray
    cost: np.ndarray
    constant: float
    col_source: np.ndarray
    col_sign: np.ndarray
    offset: np.ndarray
    row_sign: np.ndarray
    slack_basis: List[int]   # column usable as initial basic variable, or -1
    n_problem_rows: int


class SimplexSolver:
    """Dense two-phase primal simplex with Bland's anti-cycling rule"""

    def __init__(self, settings: SolverSettings = DEFAULT_SOLVER_SETTINGS):
        """
        Initialize solver

        Args:
            settings: Tolerance and iteration limit
        """
        self.settings = settings

    def solve(self, problem: LPProblem) -> LPSolution:
        """
        Solve a linear program

        Args:
            problem: LP in general form

        Returns:
            LPSolution with optimal value, primal vector and row multipliers

        Raises:
            InfeasibleError: If no feasible point exists
            UnboundedError: If the objective is unbounded below
            IterationLimitError: If the pivot budget is exhausted
        """
        std = self._standardize(problem)
        m, n = std.A.shape
        tol = self.settings.tol

        # Phase 1 tableau: structural columns, then one artificial per row lacking a slack.
        artificial_rows = [i for i in range(m) if std.slack_basis[i] < 0]
        n_art = len(artificial_rows)
        tableau = np.zeros((m + 1, n + n_art + 1))
        tableau[:m, :n] = std.A
        tableau[:m, -1] = std.b
        basis = list(std.slack_basis)
        for k, i in enumerate(artificial_rows):
            tableau[i, n + k] = 1.0
            basis[i] = n + k

        iterations = 0
        if n_art:
            phase1_cost = np.zeros(n + n_art)
            phase1_cost[n:] = 1.0
            self._set_objective(tableau, basis, phase1_cost)
            iterations += self._iterate(tableau, basis, n + n_art, iterations)
            infeasibility = -tableau[-1, -1]
            if infeasibility > tol * (1.0 + np.abs(std.b).sum()):
                raise InfeasibleError(
                    f"LP infeasible: phase-1 residual {infeasibility:.3g}",
                    {'residual': float(infeasibility)}
                )
            logger.debug("Phase 1 finished after %d pivots", iterations)
            tableau, basis, kept = self._drive_out_artificials(tableau, basis, n)
        else:
            kept = list(range(m))

        # Phase 2 on the structural columns only.
        tableau = np.hstack([tableau[:, :n], tableau[:, -1:]])
        self._set_objective(tableau, basis, std.cost)
        iterations += self._iterate(tableau, basis, n, iterations)
        logger.debug("Phase 2 finished after %d pivots in total", iterations)

        return self._extract(std, basis, kept, iterations)

    def _standardize(self, problem: LPProblem) -> _StandardForm:
        n_orig = problem.n_vars
        lower = np.asarray(problem.lower, dtype=float)
        upper = np.asarray(problem.upper, dtype=float)
        has_lo, has_up = np.isfinite(lower), np.isfinite(upper)
        offset = np.where(has_lo, lower, np.where(has_up, upper, 0.0))

        # each original variable maps to one column (+1 shifted, -1 flipped) or two (free split)
        source: List[int] = []
        sign: List[float] = []
        boxed: List[Tuple[int, float]] = []
        for j in range(n_orig):
            if has_lo[j]:
                source.append(j)
                sign.append(1.0)
                if has_up[j]:
                    boxed.append((len(source) - 1, upper[j] - lower[j]))
            elif has_up[j]:
                source.append(j)
                sign.append(-1.0)
            else:
                source.extend((j, j))
                sign.extend((1.0, -1.0))
        col_source = np.asarray(source, dtype=int)
        col_sign = np.asarray(sign, dtype=float)
        n_struct = col_source.size

        A = problem.A[:, col_source] * col_sign
        b = problem.b - problem.A @ offset
        senses = list(problem.senses)
        if boxed:
            box_rows = np.zeros((len(boxed), n_struct))
            box_rows[np.arange(len(boxed)), [col for col, _ in boxed]] = 1.0
            A = np.vstack([A, box_rows])
            b = np.concatenate([b, [bound for _, bound in boxed]])
            senses.extend([ConstraintSense.LE] * len(boxed))

        m = b.size
        n_slack = sum(1 for s in senses if s != ConstraintSense.EQ)
        full = np.zeros((m, n_struct + n_slack))
        full[:, :n_struct] = A
        slack_col = [-1] * m
        k = n_struct
        for i, sense in enumerate(senses):
            if sense == ConstraintSense.LE:
                full[i, k] = 1.0
            elif sense == ConstraintSense.GE:
                full[i, k] = -1.0
            else:
                continue
            slack_col[i] = k
            k += 1

        row_sign = np.where(b < 0, -1.0, 1.0)
        full *= row_sign[:, None]
        b = b * row_sign
        slack_basis = [
            col if col >= 0 and full[i, col] > 0 else -1
            for i, col in enumerate(slack_col)
        ]
        cost = np.zeros(n_struct + n_slack)
        cost[:n_struct] = problem.c[col_source] * col_sign
        return _StandardForm(
            A=full, b=b, cost=cost, constant=float(problem.c @ offset),
            col_source=col_source, col_sign=col_sign, offset=offset,
            row_sign=row_sign, slack_basis=slack_basis,
            n_problem_rows=problem.n_rows
        )

    @staticmethod
    def _set_objective(tableau: np.ndarray, basis: List[int], cost: np.ndarray) -> None:
        m = tableau.shape[0] - 1
        n = cost.size
        c_b = cost[basis]
        tableau[-1, :n] = cost - c_b @ tableau[:m, :n]
        tableau[-1, n:-1] = 0.0
        tableau[-1, -1] = -c_b @ tableau[:m, -1]

    def _iterate(self, tableau: np.ndarray, basis: List[int], n_cols: int, done: int) -> int:
        """Pivot until optimal; returns the number of pivots made"""
        tol = self.settings.tol
        m = tableau.shape[0] - 1
        pivots = 0
        while True:
            reduced = tableau[-1, :n_cols]
            candidates = np.flatnonzero(reduced < -tol)
            if candidates.size == 0:
                return pivots
            # Bland: lowest-index improving column
            col = int(candidates[0])
            column = tableau[:m, col]
            rows = np.flatnonzero(column > tol)
            if rows.size == 0:
                raise UnboundedError(
                    f"LP unbounded along column {col}", {'column': col}
                )
            ratios = tableau[rows, -1] / column[rows]
            best = ratios.min()
            tied = rows[ratios <= best + tol * (1.0 + abs(best))]
            # Bland: among tied rows, the one whose basic variable has the lowest index
            row = int(min(tied, key=lambda i: basis[i]))
            self._pivot(tableau, row, col)
            basis[row] = col
            pivots += 1
            if done + pivots >= self.settings.max_iterations:
                raise IterationLimitError(
                    f"Simplex exceeded {self.settings.max_iterations} pivots",
                    {'iterations': done + pivots}
                )

    @staticmethod
    def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
        tableau[row] /= tableau[row, col]
        factors = tableau[:, col].copy()
        factors[row] = 0.0
        tableau -= np.outer(factors, tableau[row])

    def _drive_out_artificials(self, tableau: np.ndarray, basis: List[int], n: int):
        """Pivot zero-level artificials out of the basis; drop redundant rows"""
        tol = self.settings.tol
        m = tableau.shape[0] - 1
        kept = []
        for i in range(m):
            if basis[i] >= n:
                nonzero = np.flatnonzero(np.abs(tableau[i, :n]) > tol)
                if nonzero.size == 0:
                    continue
                col = int(nonzero[0])
                self._pivot(tableau, i, col)
                basis[i] = col
            kept.append(i)
        if len(kept) < m:
            logger.debug("Dropped %d redundant equality rows", m - len(kept))
        tableau = tableau[kept + [m]]
        basis = [basis[i] for i in kept]
        return tableau, basis, kept

    def _extract(self, std: _StandardForm, basis: List[int], kept: List[int],
                 iterations: int) -> LPSolution:
        n = std.A.shape[1]
        A_kept = std.A[kept]
        z = np.zeros(n)
        y_std = np.zeros(std.A.shape[0])
        if basis:
            B = A_kept[:, basis]
            # Re-solve against the original data to shed accumulated pivot error.
            z[basis] = np.clip(np.linalg.solve(B, std.b[kept]), 0.0, None)
            y_std[kept] = np.linalg.solve(B.T, std.cost[basis])
        y = y_std * std.row_sign
        reduced = std.cost - std.A.T @ y_std
        slackness = float(np.abs(z * reduced).sum())
        x = std.offset + np.bincount(
            std.col_source, weights=std.col_sign * z[:std.col_source.size],
            minlength=std.offset.size
        )
        value = float(std.cost @ z) + std.constant
        return LPSolution(
            value=value,
            x=x,
            dual=y[:std.n_problem_rows],
            iterations=iterations,
            slackness_residual=slackness
        )
