"""Realized and expected profit of an order plan.

Each product earns ``unit_profit`` per unit sold and loses ``unit_loss`` per
unit ordered but left unsold. The profit of a catalog is the sum of the
per-product profits, so its expectation only depends on the marginal demand
distributions (checked numerically by :func:`expected_profit_joint_discrete`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .demand import (
    ContinuousDemand,
    Demand,
    DiscreteDemand,
    Exponential,
    JointDiscreteDemand,
    PiecewiseEmpirical,
    TruncatedNormal,
    Uniform,
)
from .exceptions import DomainError, LengthMismatch, QuadratureFailure

QUAD_TOL = 1e-9


@dataclass(frozen=True)
class Product:
    name: str
    unit_profit: float
    unit_loss: float

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise DomainError("product name must be a non-empty string")
        if not (self.unit_profit > 0 and math.isfinite(self.unit_profit)):
            raise DomainError(f"{self.name}: unit_profit must be positive, got {self.unit_profit}")
        if not (self.unit_loss >= 0 and math.isfinite(self.unit_loss)):
            raise DomainError(f"{self.name}: unit_loss must be >= 0, got {self.unit_loss}")


@dataclass(frozen=True)
class Catalog:
    """Ordered ``(Product, demand)`` pairs."""

    entries: tuple[tuple[Product, Demand], ...]

    def __post_init__(self):
        entries = tuple((p, d) for p, d in self.entries)
        if not entries:
            raise DomainError("a catalog needs at least one product")
        for p, d in entries:
            if not isinstance(p, Product):
                raise DomainError(f"expected a Product, got {type(p).__name__}")
            if not isinstance(d, (ContinuousDemand, DiscreteDemand)):
                raise DomainError(f"{p.name}: unsupported demand model {type(d).__name__}")
        names = [p.name for p, _ in entries]
        if len(set(names)) != len(names):
            raise DomainError("product names must be unique")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, *entries: tuple[Product, Demand]) -> Catalog:
        return cls(tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def products(self) -> list[Product]:
        return [p for p, _ in self.entries]

    @property
    def demands(self) -> list[Demand]:
        return [d for _, d in self.entries]

    @property
    def all_continuous(self) -> bool:
        return all(not d.is_discrete for d in self.demands)

    @property
    def all_discrete(self) -> bool:
        return all(d.is_discrete for d in self.demands)


@dataclass(frozen=True)
class OrderPlan:
    quantities: tuple[float, ...]

    def __post_init__(self):
        q = tuple(self.quantities)
        for v in q:
            if not (v >= 0) or math.isinf(v):
                raise DomainError(f"order quantities must be finite and >= 0, got {v}")
        object.__setattr__(self, "quantities", q)

    def __len__(self) -> int:
        return len(self.quantities)

    def __iter__(self):
        return iter(self.quantities)

    def __getitem__(self, k):
        return self.quantities[k]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.quantities, dtype=float)


def as_plan(plan: OrderPlan | Iterable[float], catalog: Catalog) -> OrderPlan:
    """Coerce ``plan`` to an :class:`OrderPlan` valid for ``catalog``.

    Discrete products need integral quantities; they are stored as ``int``.
    """
    values = list(plan.quantities if isinstance(plan, OrderPlan) else plan)
    if len(values) != len(catalog):
        raise LengthMismatch(f"plan has {len(values)} entries, catalog has {len(catalog)}")
    out = []
    for (p, d), v in zip(catalog, values):
        if d.is_discrete:
            if float(v) != int(v):
                raise DomainError(f"{p.name}: discrete demand needs an integer order, got {v}")
            out.append(int(v))
        else:
            out.append(float(v))
    return OrderPlan(tuple(out))


def realized_profit_matrix(catalog: Catalog, plan, demand: np.ndarray) -> np.ndarray:
    """Row-wise realized profit for a ``(n_scenarios, K)`` demand matrix."""
    plan = as_plan(plan, catalog)
    demand = np.asarray(demand, dtype=float)
    if demand.ndim != 2 or demand.shape[1] != len(catalog):
        raise LengthMismatch(f"demand must have {len(catalog)} columns")
    if np.any(demand < 0):
        raise DomainError("demand must be nonnegative")
    n = plan.as_array()
    c = np.array([p.unit_profit for p in catalog.products])
    s = np.array([p.unit_loss for p in catalog.products])
    short = demand <= n
    per_product = np.where(short, demand * c - (n - demand) * s, c * n)
    return per_product.sum(axis=1)


def realized_profit(catalog: Catalog, plan, demand: Sequence[float]) -> float:
    """Profit once demand is known: unsold units cost ``unit_loss`` each,
    sales are capped at the quantity ordered."""
    demand = np.asarray(demand, dtype=float)
    if demand.ndim != 1 or len(demand) != len(catalog):
        raise LengthMismatch(f"demand has {demand.size} entries, catalog has {len(catalog)}")
    return float(realized_profit_matrix(catalog, plan, demand[None, :])[0])


def _check_order(n: float) -> None:
    if not (n >= 0) or math.isinf(n):
        raise DomainError(f"order quantity must be finite and >= 0, got {n}")


def expected_profit_term_continuous(p: Product, d: ContinuousDemand, n: float) -> float:
    """``c n + (c + s) * integral_0^n (x - n) f(x) dx``.

    Closed form for uniform and exponential demand; adaptive quadrature
    (absolute tolerance 1e-9) for the other families.
    """
    _check_order(n)
    if d.is_discrete:
        raise DomainError(f"{p.name}: expected continuous demand")
    c, s = p.unit_profit, p.unit_loss
    if n == 0:
        return 0.0
    if isinstance(d, (Uniform, Exponential)):
        return c * n - (c + s) * float(d.cdf_integral(n))
    return c * n + (c + s) * _shortfall_integral(d, n)


def _shortfall_integral(d: ContinuousDemand, n: float) -> float:
    lo = d.lo if isinstance(d, TruncatedNormal) else 0.0
    if n <= lo:
        return 0.0
    points = None
    if isinstance(d, PiecewiseEmpirical):
        points = [b for b in d.breakpoints if lo < b < n] or None
    value, abserr, *rest = integrate.quad(
        lambda x: (x - n) * d.pdf(x),
        lo,
        n,
        epsabs=QUAD_TOL,
        epsrel=0.0,
        limit=200,
        points=points,
        full_output=1,
    )
    if abserr > QUAD_TOL:
        raise QuadratureFailure(
            f"quadrature error estimate {abserr:.3g} exceeds {QUAD_TOL} on [{lo}, {n}]"
        )
    return value


def expected_profit_term_discrete(p: Product, d: DiscreteDemand, n: int) -> float:
    """``c n + (c + s) * sum_{i=0}^{n} (i - n) pmf(i)``, summed exactly."""
    _check_order(n)
    if int(n) != n:
        raise DomainError(f"{p.name}: discrete order must be an integer, got {n}")
    if not d.is_discrete:
        raise DomainError(f"{p.name}: expected discrete demand")
    n = int(n)
    c, s = p.unit_profit, p.unit_loss
    pmf = d.pmf_array(n)
    shortfall = math.fsum((np.arange(n + 1) - n) * pmf)
    return c * n + (c + s) * shortfall


def expected_profit_term(p: Product, d: Demand, n: float) -> float:
    if d.is_discrete:
        return expected_profit_term_discrete(p, d, n)
    return expected_profit_term_continuous(p, d, n)


def expected_profit_terms(catalog: Catalog, plan) -> list[float]:
    plan = as_plan(plan, catalog)
    return [expected_profit_term(p, d, n) for (p, d), n in zip(catalog, plan)]


def expected_profit(catalog: Catalog, plan) -> float:
    """Expected profit of the whole catalog: the sum of per-product terms."""
    return math.fsum(expected_profit_terms(catalog, plan))


def expected_profit_joint_discrete(
    p1: Product, p2: Product, joint: JointDiscreteDemand, n1: int, n2: int
) -> float:
    """Expected two-product profit summed region by region over ``p(i, j)``.

    Does not use the marginals; comparing against the sum of the marginal
    terms checks that the joint law drops out.
    """
    for n in (n1, n2):
        _check_order(n)
        if int(n) != n:
            raise DomainError(f"orders must be integers, got {n}")
    n1, n2 = int(n1), int(n2)
    c1, s1, c2, s2 = p1.unit_profit, p1.unit_loss, p2.unit_profit, p2.unit_loss
    mass = joint.mass
    i = np.arange(mass.shape[0])[:, None]
    j = np.arange(mass.shape[1])[None, :]
    x_short = i <= n1
    y_short = j <= n2
    both = (i * (c1 + s1) + j * (c2 + s2) - n1 * s1 - n2 * s2) * mass
    only_x = (i * (c1 + s1) - n1 * s1 + c2 * n2) * mass
    only_y = (j * (c2 + s2) + c1 * n1 - n2 * s2) * mass
    neither = (c1 * n1 + c2 * n2) * mass
    regions = (
        both[x_short & y_short],
        only_x[x_short & ~y_short],
        only_y[~x_short & y_short],
        neither[~x_short & ~y_short],
    )
    return math.fsum(np.concatenate(regions))


def forward_difference(p: Product, d: DiscreteDemand, n: int) -> float:
    """Gain from ordering unit ``n + 1``: ``c - (c + s) * P(D <= n)``."""
    _check_order(n)
    return p.unit_profit - (p.unit_profit + p.unit_loss) * d.cdf(n)
