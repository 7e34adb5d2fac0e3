"""Unconstrained optimal order quantities via the critical fractile."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .demand import ContinuousDemand, DiscreteDemand
from .exceptions import NotContinuous, UnboundedQuantile
from .profit import Catalog, OrderPlan, Product, as_plan, expected_profit

CONTINUOUS = "continuous_fractile"
DISCRETE = "discrete_forward_difference"


@dataclass(frozen=True)
class ProductSolution:
    name: str
    n_opt: float
    fractile: float
    cdf_at_n: float
    # c - (c + s) F(n): the derivative (continuous) or forward difference (discrete)
    stationarity_residual: float
    method: str
    note: str | None = None


@dataclass(frozen=True)
class SolveReport:
    plan: OrderPlan
    per_product: tuple[ProductSolution, ...]
    expected_profit: float
    method: str
    notes: tuple[str, ...] = field(default=())


def critical_fractile(p: Product) -> float:
    return p.unit_profit / (p.unit_profit + p.unit_loss)


def _unbounded(p: Product) -> UnboundedQuantile:
    return UnboundedQuantile(
        f"product {p.name!r}: unbounded order quantity "
        "(zero unit_loss with unbounded demand support)"
    )


def optimal_continuous(p: Product, d: ContinuousDemand) -> float:
    """Smallest ``n`` at which the demand cdf reaches ``c / (c + s)``."""
    if d.is_discrete:
        raise NotContinuous(f"product {p.name!r}: demand is discrete")
    try:
        return d.quantile(critical_fractile(p))
    except UnboundedQuantile:
        raise _unbounded(p) from None


def optimal_discrete(p: Product, d: DiscreteDemand) -> int:
    """Smallest integer ``n`` with ``P(D <= n) >= c / (c + s)``.

    Every unit below it has a positive forward difference and no unit above
    it has one, so it maximises the expected profit; exact ties at the
    fractile resolve to the smaller order.
    """
    if not d.is_discrete:
        raise TypeError(f"product {p.name!r}: demand is continuous")
    try:
        return int(d.quantile(critical_fractile(p)))
    except UnboundedQuantile:
        raise _unbounded(p) from None


def solve_product(p: Product, d) -> ProductSolution:
    fractile = critical_fractile(p)
    if d.is_discrete:
        n = optimal_discrete(p, d)
        method = DISCRETE
    else:
        n = optimal_continuous(p, d)
        method = CONTINUOUS
    cdf_n = float(d.cdf(n))
    note = None
    if cdf_n < fractile:
        # only reachable when the total table mass falls short of 1 by rounding
        note = f"cdf never reaches the fractile; ordering the support maximum {n}"
    return ProductSolution(
        name=p.name,
        n_opt=n,
        fractile=fractile,
        cdf_at_n=cdf_n,
        stationarity_residual=p.unit_profit - (p.unit_profit + p.unit_loss) * cdf_n,
        method=method,
        note=note,
    )


def solve(catalog: Catalog) -> SolveReport:
    """Solve each product independently and assemble the plan."""
    solutions = tuple(solve_product(p, d) for p, d in catalog)
    plan = as_plan([s.n_opt for s in solutions], catalog)
    methods = {s.method for s in solutions}
    return SolveReport(
        plan=plan,
        per_product=solutions,
        expected_profit=expected_profit(catalog, plan),
        method=methods.pop() if len(methods) == 1 else "mixed",
        notes=tuple(f"{s.name}: {s.note}" for s in solutions if s.note),
    )


@dataclass(frozen=True)
class ConcavityCertificate:
    delta1: float
    delta2: float
    verdict: bool

    def __iter__(self):
        return iter((self.delta1, self.delta2, self.verdict))


def concavity_certificate(catalog: Catalog, plan) -> ConcavityCertificate:
    """Leading principal minors of the expected-profit Hessian at ``plan``.

    The Hessian is diagonal with entries ``-(c_k + s_k) f_k(n_k)``. A verdict
    of False means the certificate is inconclusive (zero density), not that
    the plan is suboptimal.
    """
    if len(catalog) != 2:
        raise ValueError(f"the certificate is defined for two products, got {len(catalog)}")
    if not catalog.all_continuous:
        raise NotContinuous("the concavity certificate needs continuous demand")
    plan = as_plan(plan, catalog)
    diag = [
        -(p.unit_profit + p.unit_loss) * float(d.pdf(n)) for (p, d), n in zip(catalog, plan)
    ]
    delta1 = diag[0]
    delta2 = diag[0] * diag[1]
    verdict = delta1 < 0 and delta2 > 0 and math.isfinite(delta2)
    return ConcavityCertificate(delta1, delta2, verdict)
