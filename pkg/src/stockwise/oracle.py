"""Independent ground truth for the solvers.

None of these routines use quantiles or the multiplier search; they either
sample demand and average realized profits, or evaluate the expected profit
over a whole grid and take the best point.

Random numbers come from NumPy's PCG64 generator. Samples are drawn in
blocks of :data:`BLOCK_SIZE`; block ``i`` is seeded with
``SeedSequence([seed, i])``, so results are reproducible on every platform
and do not depend on how blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constrained import LinearConstraint
from .exceptions import BudgetExceeded, DomainError, InfeasibleWithinBounds, LengthMismatch
from .profit import (
    Catalog,
    OrderPlan,
    as_plan,
    expected_profit_term_discrete,
    realized_profit_matrix,
)

BLOCK_SIZE = 1 << 16
GRID_BUDGET = 10**7


@dataclass(frozen=True)
class SimulationResult:
    mean: float
    std_error: float
    n_samples: int
    seed: int


def _block_stats(catalog: Catalog, plan: OrderPlan, seed: int, index: int, size: int):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))
    demand = np.column_stack([d.sample(rng, size) for d in catalog.demands])
    profit = realized_profit_matrix(catalog, plan, demand)
    mean = float(np.mean(profit))
    return size, mean, float(np.sum((profit - mean) ** 2))


def simulate_profit(
    catalog: Catalog, plan, n_samples: int, seed: int, workers: int = 1
) -> SimulationResult:
    """Monte-Carlo estimate of the expected profit of ``plan``.

    Block statistics are merged in block order with the pairwise update of
    Chan et al., so ``workers`` never changes the result.
    """
    if int(n_samples) != n_samples or n_samples < 2:
        raise DomainError(f"n_samples must be an integer >= 2, got {n_samples}")
    if int(seed) != seed or seed < 0:
        raise DomainError(f"seed must be a nonnegative integer, got {seed}")
    n_samples, seed = int(n_samples), int(seed)
    plan = as_plan(plan, catalog)
    sizes = [min(BLOCK_SIZE, n_samples - start) for start in range(0, n_samples, BLOCK_SIZE)]
    jobs = [(catalog, plan, seed, i, size) for i, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda job: _block_stats(*job), jobs))
    else:
        blocks = [_block_stats(*job) for job in jobs]

    count, mean, m2 = blocks[0]
    for size, block_mean, block_m2 in blocks[1:]:
        total = count + size
        delta = block_mean - mean
        mean += delta * size / total
        m2 += block_m2 + delta * delta * count * size / total
        count = total
    std_error = math.sqrt(m2 / (count - 1)) / math.sqrt(count)
    return SimulationResult(mean=mean, std_error=std_error, n_samples=count, seed=seed)


def _lexicographic_argmax(values: np.ndarray, mask: np.ndarray | None = None):
    flat = values.ravel()
    if mask is not None:
        flat = np.where(mask.ravel(), flat, -np.inf)
        if not np.any(mask):
            return None
    # np.argmax returns the first maximum; C order is lexicographic order
    return np.unravel_index(int(np.argmax(flat)), values.shape)


def brute_force_argmax_discrete(catalog: Catalog, bounds, budget: int = GRID_BUDGET) -> OrderPlan:
    """Exact argmax of the expected profit over ``{0..b_1} x ... x {0..b_K}``."""
    if not catalog.all_discrete:
        raise DomainError("brute force needs discrete demand for every product")
    bounds = [int(b) for b in bounds]
    if len(bounds) != len(catalog):
        raise LengthMismatch(f"{len(bounds)} bounds for {len(catalog)} products")
    if any(b < 0 for b in bounds):
        raise DomainError("bounds must be nonnegative")
    size = math.prod(b + 1 for b in bounds)
    if size > budget:
        raise BudgetExceeded(f"lattice has {size} points, budget is {budget}")
    total = np.zeros(())
    for (p, d), b in zip(catalog, bounds):
        terms = np.array([expected_profit_term_discrete(p, d, n) for n in range(b + 1)])
        total = np.add.outer(total, terms)
    index = _lexicographic_argmax(total)
    return OrderPlan(tuple(int(i) for i in index))


def term_values(product, demand, n: np.ndarray) -> np.ndarray:
    """Closed-form expected profit ``c n - (c + s) E[(n - D)^+]`` on an array."""
    c, s = product.unit_profit, product.unit_loss
    n = np.asarray(n, dtype=float)
    return c * n - (c + s) * demand.cdf_integral(n)


def _axis(bound: float, step: float) -> np.ndarray:
    count = int(math.floor(bound / step + 1e-9)) + 1
    return np.arange(count) * step


def grid_argmax_continuous(
    catalog: Catalog,
    bounds,
    step: float,
    cons: LinearConstraint | None = None,
    budget: int = GRID_BUDGET,
) -> OrderPlan:
    """Best point of the grid ``{0, step, 2 step, ...}`` inside ``bounds``.

    With an equality constraint the last product with a nonzero coefficient
    is solved from the constraint instead of being gridded, so every
    candidate lies exactly on the constraint.
    """
    if not catalog.all_continuous:
        raise DomainError("grid search needs continuous demand for every product")
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    bounds = [float(b) for b in bounds]
    if len(bounds) != len(catalog):
        raise LengthMismatch(f"{len(bounds)} bounds for {len(catalog)} products")
    if any(not (b >= 0 and math.isfinite(b)) for b in bounds):
        raise DomainError("bounds must be finite and nonnegative")
    if cons is not None and len(cons.coeffs) != len(catalog):
        raise LengthMismatch("constraint length does not match the catalog")

    entries = list(catalog)
    solved = None
    if cons is not None and cons.relation == "eq":
        solved = max(k for k, a in enumerate(cons.coeffs) if a != 0)
    axes = [
        _axis(b, step) if k != solved else None for k, b in enumerate(bounds)
    ]
    size = math.prod(len(ax) for ax in axes if ax is not None)
    if size > budget:
        raise BudgetExceeded(f"grid has {size} points, budget is {budget}")

    free = [k for k in range(len(entries)) if k != solved]
    mesh = np.meshgrid(*(axes[k] for k in free), indexing="ij") if free else []
    shape = mesh[0].shape if free else ()
    coords = [None] * len(entries)
    for k, m in zip(free, mesh):
        coords[k] = m
    mask = np.ones(shape, dtype=bool)
    if solved is not None:
        a = cons.coeffs
        rest = sum((a[k] * coords[k] for k in free), np.zeros(shape))
        last = (cons.rhs - rest) / a[solved]
        slack = 1e-12 * max(1.0, abs(cons.rhs))
        mask &= (last >= -slack) & (last <= bounds[solved] + slack)
        coords[solved] = np.clip(last, 0.0, bounds[solved])
    elif cons is not None:
        used = sum((a * coords[k] for k, a in enumerate(cons.coeffs)), np.zeros(shape))
        mask &= used - cons.rhs <= 1e-12 * max(1.0, abs(cons.rhs))

    value = np.zeros(shape)
    for (p, d), n in zip(entries, coords):
        value = value + term_values(p, d, n)
    index = _lexicographic_argmax(value, mask)
    if index is None:
        raise InfeasibleWithinBounds("no grid point satisfies the constraint")
    return OrderPlan(tuple(float(np.asarray(coords[k])[index]) for k in range(len(entries))))
