from dataclasses import dataclass

TOOL_VERSION = "0.4.0"

# Absolute tolerance for the metric axioms; absorbs snowflake rounding.
METRIC_TOL = 1e-12

BALANCE_TOL = 1e-9
RECONSTRUCTION_TOL = 1e-9
CLARKSON_RTOL = 1e-12

# Descent stops once the relative improvement of the L^p objective drops below this.
DESCENT_RTOL = 1e-8


@dataclass(frozen=True)
class SolverSettings:
    """Numerical settings of the dense simplex solver"""
    tol: float = 1e-9
    max_iterations: int = 50_000


DEFAULT_SOLVER_SETTINGS = SolverSettings()
