"""Expected-profit maximisation under a restriction on the order plan.

Feasibility convention: a plan ``n`` is feasible when ``f(n) <= 0`` (or
``f(n) = 0`` for equalities); the linear form is ``f(n) = a . n - rhs``.

* linear equality, continuous demand: bisection on the Lagrange multiplier;
* linear inequality, continuous demand: the unconstrained plan if it is
  feasible, otherwise the equality solution on the boundary;
* anything over discrete demand: exhaustive search of the integer lattice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import (
    BudgetExceeded,
    DomainError,
    Infeasible,
    InfeasibleWithinBounds,
    LengthMismatch,
    NotContinuous,
    UnboundedQuantile,
)
from .fractile import solve
from .profit import Catalog, OrderPlan, as_plan, expected_profit_term

LATTICE_BUDGET = 10**7
MAX_BISECTIONS = 200


@dataclass(frozen=True)
class LinearConstraint:
    coeffs: tuple[float, ...]
    rhs: float
    relation: str = "le"

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if self.relation not in ("eq", "le"):
            raise DomainError(f"relation must be 'eq' or 'le', got {self.relation!r}")
        if not coeffs or all(a == 0 for a in coeffs):
            raise DomainError("constraint coefficients must not all be zero")
        if not all(math.isfinite(a) for a in coeffs) or not math.isfinite(self.rhs):
            raise DomainError("constraint coefficients and rhs must be finite")

    def residual(self, plan) -> float:
        """``a . n - rhs``; feasible when <= 0 (``le``) or == 0 (``eq``)."""
        q = plan.quantities if isinstance(plan, OrderPlan) else tuple(plan)
        if len(q) != len(self.coeffs):
            raise LengthMismatch(f"plan has {len(q)} entries, constraint has {len(self.coeffs)}")
        return math.fsum(a * n for a, n in zip(self.coeffs, q)) - self.rhs

    def is_satisfied(self, plan, tol: float = 0.0) -> bool:
        r = self.residual(plan)
        return abs(r) <= tol if self.relation == "eq" else r <= tol


@dataclass(frozen=True)
class PredicateConstraint:
    """Arbitrary feasibility test over an :class:`OrderPlan`."""

    test: Callable[[OrderPlan], bool]

    def is_satisfied(self, plan, tol: float = 0.0) -> bool:
        return bool(self.test(plan))


Constraint = LinearConstraint | PredicateConstraint


@dataclass(frozen=True)
class ConstrainedSolution:
    plan: OrderPlan
    active: bool
    # None for the lattice search and the trivial rhs = 0 case
    multiplier: float | None
    method: str


def _check_resource_constraint(catalog: Catalog, cons: LinearConstraint) -> np.ndarray:
    if not catalog.all_continuous:
        raise NotContinuous("the Lagrange path needs continuous demand for every product")
    if not isinstance(cons, LinearConstraint):
        raise DomainError("expected a linear constraint")
    a = np.asarray(cons.coeffs)
    if len(a) != len(catalog):
        raise LengthMismatch(f"constraint has {len(a)} coefficients, catalog has {len(catalog)}")
    if np.any(a <= 0):
        raise DomainError("the Lagrange path needs strictly positive coefficients")
    return a


def _orders_at(catalog: Catalog, a: np.ndarray, lam: float) -> np.ndarray:
    """Maximiser of the Lagrangian for a fixed multiplier, projected onto n >= 0."""
    out = np.empty(len(catalog))
    for k, (p, d) in enumerate(catalog):
        c, s = p.unit_profit, p.unit_loss
        level = (c - lam * a[k]) / (c + s)
        if level <= 0.0:
            out[k] = 0.0
        elif level >= 1.0:
            out[k] = d.support_max
        else:
            out[k] = min(max(d.quantile(level), 0.0), d.support_max)
    return out


def solve_equality_continuous(catalog: Catalog, cons: LinearConstraint) -> ConstrainedSolution:
    """Maximise expected profit subject to ``a . n = rhs``.

    Bisects on the multiplier ``lam`` of the stationarity condition
    ``c_k - (c_k + s_k) F_k(n_k) = lam a_k``; the total ``a . n(lam)`` is
    nonincreasing in ``lam``. If the cdfs have flat stretches the map jumps,
    and the bracket endpoints are blended to land on the constraint.
    """
    a = _check_resource_constraint(catalog, cons)
    rhs = float(cons.rhs)
    if rhs < 0:
        raise Infeasible(f"rhs {rhs} is negative; no nonnegative plan satisfies it")
    cap = math.fsum(a_k * d.support_max for a_k, d in zip(a, catalog.demands))
    if rhs > cap:
        raise Infeasible(f"rhs {rhs} exceeds the largest useful total {cap}")
    if rhs == 0:
        return ConstrainedSolution(as_plan([0.0] * len(a), catalog), True, None, "lagrange_bisection")

    # absolute target, relaxed only where float spacing at rhs forbids it
    tol = max(1e-9, 8 * math.ulp(rhs))
    c = np.array([p.unit_profit for p in catalog.products])
    s = np.array([p.unit_loss for p in catalog.products])
    # at lam_hi every order is zero; at lam_lo every order is at its support maximum
    lam_hi = float(np.max(c / a))
    lam_lo = float(np.min(-s / a))

    def total(n):
        return math.fsum(a * n)

    n_hi = np.zeros(len(a))
    g_hi = 0.0
    g_lo = cap
    n_lo = np.array([d.support_max for d in catalog.demands])
    lam = None
    for _ in range(MAX_BISECTIONS):
        lam = 0.5 * (lam_lo + lam_hi)
        if not lam_lo < lam < lam_hi:
            break
        n = _orders_at(catalog, a, lam)
        g = total(n)
        assert g_hi - tol <= g <= g_lo + tol, "a . n(lam) must be nonincreasing in lam"
        if abs(g - rhs) <= tol:
            return ConstrainedSolution(as_plan(n, catalog), True, lam, "lagrange_bisection")
        if g > rhs:
            lam_lo, n_lo, g_lo = lam, n, g
        else:
            lam_hi, n_hi, g_hi = lam, n, g

    if not math.isfinite(g_lo):
        raise Infeasible("multiplier bracket collapsed onto an unbounded order")
    weight = (rhs - g_hi) / (g_lo - g_hi)
    n = n_hi + weight * (n_lo - n_hi)
    return ConstrainedSolution(as_plan(n, catalog), True, lam, "lagrange_bisection")


def solve_inequality_continuous(catalog: Catalog, cons: LinearConstraint) -> ConstrainedSolution:
    """Maximise expected profit subject to ``a . n <= rhs``.

    The objective is concave and the feasible set convex, so either the
    unconstrained optimum is feasible or the constraint binds.
    """
    _check_resource_constraint(catalog, cons)
    try:
        free = solve(catalog).plan
    except UnboundedQuantile:
        free = None
    if free is not None and cons.residual(free) <= 0:
        return ConstrainedSolution(free, False, 0.0, "continuous_fractile")
    eq = LinearConstraint(cons.coeffs, cons.rhs, "eq")
    return solve_equality_continuous(catalog, eq)


def solve_continuous(catalog: Catalog, cons: LinearConstraint) -> ConstrainedSolution:
    if cons.relation == "eq":
        return solve_equality_continuous(catalog, cons)
    return solve_inequality_continuous(catalog, cons)


def _lattice_size(bounds: Sequence[int]) -> int:
    return math.prod(b + 1 for b in bounds)


def _check_bounds(catalog: Catalog, bounds) -> list[int]:
    bounds = [int(b) for b in bounds]
    if len(bounds) != len(catalog):
        raise LengthMismatch(f"{len(bounds)} bounds for {len(catalog)} products")
    if any(b < 0 for b in bounds):
        raise DomainError("bounds must be nonnegative")
    return bounds


def solve_discrete_lattice(
    catalog: Catalog,
    cons: Constraint,
    bounds: Sequence[int],
    budget: int = LATTICE_BUDGET,
) -> ConstrainedSolution:
    """Best feasible integer plan in ``[0, bounds]`` by full enumeration.

    Plans are visited in lexicographic order and only a strictly better plan
    replaces the incumbent, so ties go to the lexicographically smallest.
    """
    if not catalog.all_discrete:
        raise DomainError("lattice search needs discrete demand for every product")
    bounds = _check_bounds(catalog, bounds)
    size = _lattice_size(bounds)
    if size > budget:
        raise BudgetExceeded(f"lattice has {size} points, budget is {budget}")
    tables = [
        [expected_profit_term(p, d, n) for n in range(b + 1)]
        for (p, d), b in zip(catalog, bounds)
    ]
    best_value = free_value = -math.inf
    best = None
    for point in itertools.product(*(range(b + 1) for b in bounds)):
        value = math.fsum(t[n] for t, n in zip(tables, point))
        free_value = max(free_value, value)
        plan = OrderPlan(point)
        if value > best_value and cons.is_satisfied(plan, tol=1e-9):
            best_value, best = value, plan
    if best is None:
        raise InfeasibleWithinBounds(f"no feasible plan within bounds {bounds}")
    # active: the restriction costs expected profit within the searched box
    return ConstrainedSolution(best, best_value < free_value, None, "lattice_enumeration")
