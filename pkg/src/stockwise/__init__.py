"""Profit-maximising order quantities for products with random demand."""

from .constrained import (
    ConstrainedSolution,
    LinearConstraint,
    PredicateConstraint,
    solve_continuous,
    solve_discrete_lattice,
    solve_equality_continuous,
    solve_inequality_continuous,
)
from .demand import (
    Exponential,
    Geometric,
    JointDiscreteDemand,
    PiecewiseEmpirical,
    Poisson,
    TableDemand,
    TruncatedNormal,
    Uniform,
    cdf_at,
    fit_empirical,
    marginals,
    quantile,
)
from .estimator import FractileOrderPlanner
from .exceptions import (
    BudgetExceeded,
    DomainError,
    EmptySample,
    Infeasible,
    InfeasibleWithinBounds,
    LengthMismatch,
    NegativeDemand,
    NotContinuous,
    QuadratureFailure,
    StockwiseError,
    UnboundedQuantile,
)
from .fractile import (
    SolveReport,
    concavity_certificate,
    critical_fractile,
    optimal_continuous,
    optimal_discrete,
    solve,
)
from .oracle import (
    SimulationResult,
    brute_force_argmax_discrete,
    grid_argmax_continuous,
    simulate_profit,
)
from .profit import (
    Catalog,
    OrderPlan,
    Product,
    expected_profit,
    expected_profit_joint_discrete,
    expected_profit_term,
    expected_profit_term_continuous,
    expected_profit_term_discrete,
    forward_difference,
    realized_profit,
)

__version__ = "0.1.0"
