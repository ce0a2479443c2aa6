import numpy as np
import pytest
from scipy.optimize import linprog

from config import SolverSettings
from exceptions import InfeasibleError, IterationLimitError, UnboundedError
from models.enums import ConstraintSense
from models.transport import LPProblem
from services.lp_solver import SimplexSolver

LE, GE, EQ = ConstraintSense.LE, ConstraintSense.GE, ConstraintSense.EQ


@pytest.fixture
def solver():
    return SimplexSolver()


def test_covering_lp(solver):
    # min 3x1 + 4x2  s.t.  x1 + x2 >= 2, 2x1 + x2 >= 3
    problem = LPProblem(c=[3, 4], A=[[1, 1], [2, 1]], senses=(GE, GE), b=[2, 3])
    solution = solver.solve(problem)
    assert solution.value == pytest.approx(6.0)
    np.testing.assert_allclose(solution.x, [2.0, 0.0], atol=1e-12)
    # duals of GE rows are nonnegative and certify the optimum
    assert np.all(solution.dual >= -1e-12)
    assert solution.dual @ problem.b == pytest.approx(6.0)


def test_beale_cycling_example(solver):
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    solution = solver.solve(LPProblem(c=c, A=A, senses=(LE, LE, LE), b=[0, 0, 1]))
    assert solution.value == pytest.approx(-0.05)


def test_infeasible(solver):
    problem = LPProblem(c=[1], A=[[1]], senses=(LE,), b=[-1])
    with pytest.raises(InfeasibleError):
        solver.solve(problem)


def test_unbounded(solver):
    problem = LPProblem(c=[-1], A=[[1]], senses=(GE,), b=[1])
    with pytest.raises(UnboundedError):
        solver.solve(problem)


def test_iteration_limit():
    solver = SimplexSolver(SolverSettings(max_iterations=1))
    problem = LPProblem(c=[3, 4], A=[[1, 1], [2, 1]], senses=(GE, GE), b=[2, 3])
    with pytest.raises(IterationLimitError):
        solver.solve(problem)


def test_free_and_boxed_variables(solver):
    # min x1 - x2  s.t.  x1 + x2 = 1, x1 free, 0 <= x2 <= 3
    problem = LPProblem(c=[1, -1], A=[[1, 1]], senses=(EQ,), b=[1],
                        lower=[-np.inf, 0.0], upper=[np.inf, 3.0])
    solution = solver.solve(problem)
    assert solution.value == pytest.approx(-5.0)
    np.testing.assert_allclose(solution.x, [-2.0, 3.0], atol=1e-12)


def test_redundant_equalities(solver):
    problem = LPProblem(c=[1, 2], A=[[1, 1], [2, 2]], senses=(EQ, EQ), b=[1, 2])
    solution = solver.solve(problem)
    assert solution.value == pytest.approx(1.0)


def test_random_lps_match_highs(solver):
    rng = np.random.default_rng(42)
    for _ in range(40):
        m, n = 5, 5
        A = rng.uniform(0.1, 1.0, (m, n))
        b = rng.uniform(0.5, 2.0, m)
        c = rng.uniform(0.1, 1.0, n)
        senses = tuple(rng.choice([GE, EQ], size=m))
        ge = np.array([s == GE for s in senses])
        reference = linprog(
            c,
            A_ub=-A[ge] if ge.any() else None, b_ub=-b[ge] if ge.any() else None,
            A_eq=A[~ge] if (~ge).any() else None, b_eq=b[~ge] if (~ge).any() else None,
            method='highs'
        )
        if reference.status == 2:
            with pytest.raises(InfeasibleError):
                solver.solve(LPProblem(c=c, A=A, senses=senses, b=b))
            continue
        mine = solver.solve(LPProblem(c=c, A=A, senses=senses, b=b))
        assert mine.value == pytest.approx(reference.fun, rel=1e-7, abs=1e-9)
        assert mine.dual @ b == pytest.approx(mine.value, rel=1e-8, abs=1e-9)
        assert mine.slackness_residual <= 1e-8


def test_duality_on_transport_lp(solver):
    # two sources, two sinks, costs favour the diagonal
    c = [1, 3, 3, 1]
    A = [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1]]
    b = [1, 2, 1, 2]
    solution = solver.solve(LPProblem(c=c, A=A, senses=(EQ,) * 4, b=b))
    assert solution.value == pytest.approx(3.0)
    reduced = np.asarray(c) - np.asarray(A, dtype=float).T @ solution.dual
    assert np.all(reduced >= -1e-9)


def _vertex_optimum(c, A, b):
    """Brute force over all bases of {A x <= b, x >= 0}"""
    from itertools import combinations

    m, n = A.shape
    rows = np.vstack([A, -np.eye(n)])
    rhs = np.concatenate([b, np.zeros(n)])
    best = np.inf
    for active in combinations(range(m + n), n):
        M = rows[list(active)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, rhs[list(active)])
        if np.all(rows @ x <= rhs + 1e-9):
            best = min(best, float(c @ x))
    return best


def test_random_lps_match_vertex_enumeration(solver):
    rng = np.random.default_rng(8)
    for _ in range(20):
        A = rng.uniform(0.1, 1.0, (5, 5))
        b = rng.uniform(0.5, 2.0, 5)
        c = -rng.uniform(0.1, 1.0, 5)
        solution = solver.solve(LPProblem(c=c, A=A, senses=(LE,) * 5, b=b))
        assert solution.value == pytest.approx(_vertex_optimum(c, A, b), rel=1e-8, abs=1e-10)
        # LE duals are nonpositive under c - A^T y >= 0
        assert np.all(solution.dual <= 1e-12)


def test_standard_form_scales_with_constraint_matrix(solver):
    # transport-sized problem: n*n arc variables with n balance rows
    n = 80
    k = n * n
    rng = np.random.default_rng(5)
    problem = LPProblem(c=rng.uniform(0.5, 1.5, k), A=rng.uniform(0.0, 1.0, (n, k)),
                        senses=(GE,) * n, b=np.ones(n))
    std = solver._standardize(problem)
    assert std.A.shape == (n, k + n)
    stored = sum(getattr(std, name).nbytes for name in
                 ('A', 'b', 'cost', 'col_source', 'col_sign', 'offset', 'row_sign'))
    # no buffer quadratic in the number of variables
    assert stored < 4 * std.A.nbytes


def test_mixed_bounds_recover_original_variables(solver):
    # x1 in [1, 4], x2 <= 2, x3 free, x4 >= 0
    c = [1.0, -1.0, 2.0, 1.0]
    A = [[1, 1, 1, 1], [0, 0, 1, -1]]
    problem = LPProblem(c=c, A=A, senses=(EQ, GE), b=[3.0, -5.0],
                        lower=[1.0, -np.inf, -np.inf, 0.0],
                        upper=[4.0, 2.0, np.inf, np.inf])
    reference = linprog(c, A_ub=[[0, 0, -1, 1]], b_ub=[5.0], A_eq=[[1, 1, 1, 1]], b_eq=[3.0],
                        bounds=[(1, 4), (None, 2), (None, None), (0, None)], method='highs')
    solution = solver.solve(problem)
    assert solution.value == pytest.approx(reference.fun, abs=1e-9)
    assert float(np.dot(c, solution.x)) == pytest.approx(solution.value, abs=1e-9)
    assert 1.0 - 1e-12 <= solution.x[0] <= 4.0 + 1e-12
    assert solution.x[1] <= 2.0 + 1e-12
    assert sum(solution.x) == pytest.approx(3.0, abs=1e-9)
