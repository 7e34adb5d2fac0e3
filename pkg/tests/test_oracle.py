import math

import numpy as np
import pytest

from stockwise import (
    BudgetExceeded,
    Catalog,
    DomainError,
    Exponential,
    InfeasibleWithinBounds,
    LinearConstraint,
    Poisson,
    Product,
    TableDemand,
    TruncatedNormal,
    Uniform,
    brute_force_argmax_discrete,
    grid_argmax_continuous,
    simulate_profit,
    solve,
)
from stockwise.oracle import BLOCK_SIZE


class TestSimulate:
    def test_deterministic_demand(self):
        cat = Catalog.of((Product("a", 5, 1), TableDemand({2: 1.0})))
        for seed in (0, 7, 12345):
            sim = simulate_profit(cat, [2], 1000, seed)
            assert sim.mean == 10.0
            assert sim.std_error == 0.0

    def test_coin_flip(self, coin):
        cat = Catalog.of((Product("a", 1, 1), coin))
        sim = simulate_profit(cat, [1], 10**6, seed=3)
        assert abs(sim.mean) <= 4 * sim.std_error
        assert sim.n_samples == 10**6

    def test_poisson_against_analytic(self):
        from stockwise import expected_profit_term_discrete

        cat = Catalog.of((Product("a", 2, 1), Poisson(3)))
        sim = simulate_profit(cat, [4], 10**6, seed=99)
        assert abs(sim.mean - expected_profit_term_discrete(Product("a", 2, 1), Poisson(3), 4)) <= 4 * sim.std_error

    def test_bit_identical_reruns(self):
        cat = Catalog.of((Product("a", 2, 1), Poisson(3)), (Product("b", 1, 1), TruncatedNormal(4, 2)))
        a = simulate_profit(cat, [4, 4.5], 200_003, seed=42)
        b = simulate_profit(cat, [4, 4.5], 200_003, seed=42)
        assert a == b
        assert simulate_profit(cat, [4, 4.5], 200_003, seed=43) != a

    def test_independent_of_workers(self):
        cat = Catalog.of((Product("a", 2, 1), Exponential(0.5)))
        serial = simulate_profit(cat, [2.0], 5 * BLOCK_SIZE + 17, seed=1)
        threaded = simulate_profit(cat, [2.0], 5 * BLOCK_SIZE + 17, seed=1, workers=4)
        assert serial == threaded

    def test_std_error_scaling(self):
        cat = Catalog.of((Product("a", 2, 1), Poisson(3)))
        ratios = [
            simulate_profit(cat, [4], 200_000, seed=s).std_error
            / simulate_profit(cat, [4], 100_000, seed=s + 100).std_error
            for s in range(5)
        ]
        for r in ratios:
            assert r == pytest.approx(1 / math.sqrt(2), rel=0.2)

    @pytest.mark.parametrize("n, seed", [(1, 0), (2.5, 0), (10, -1)])
    def test_validation(self, coin, n, seed):
        with pytest.raises(DomainError):
            simulate_profit(Catalog.of((Product("a", 1, 1), coin)), [1], n, seed)


class TestBruteForce:
    def test_coin_tie(self, coin):
        assert brute_force_argmax_discrete(Catalog.of((Product("a", 1, 1), coin)), [5]).quantities == (0,)

    def test_poisson(self):
        assert brute_force_argmax_discrete(Catalog.of((Product("a", 2, 1), Poisson(3))), [30]).quantities == (4,)

    def test_matches_solver_two_products(self):
        cat = Catalog.of((Product("a", 2, 1), Poisson(3)), (Product("b", 3, 4), TableDemand({1: 0.4, 3: 0.6})))
        assert brute_force_argmax_discrete(cat, (20, 20)) == solve(cat).plan

    def test_budget(self, coin):
        cat = Catalog.of((Product("a", 1, 1), coin), (Product("b", 1, 1), coin))
        with pytest.raises(BudgetExceeded):
            brute_force_argmax_discrete(cat, (9999, 9999))


class TestGrid:
    def test_uniform_single(self):
        cat = Catalog.of((Product("a", 1, 1), Uniform(0, 10)))
        assert grid_argmax_continuous(cat, [10], 0.01).quantities[0] == pytest.approx(5.0, abs=0.01)

    def test_equality_instance(self):
        u = Uniform(0, 10)
        cat = Catalog.of((Product("a", 3, 1), u), (Product("b", 1, 1), u))
        plan = grid_argmax_continuous(cat, [10, 10], 0.01, LinearConstraint((1, 1), 10, "eq"))
        np.testing.assert_allclose(plan.quantities, (6.67, 3.33), atol=0.01)

    def test_step_larger_than_bound(self):
        cat = Catalog.of((Product("a", 1, 1), Uniform(0, 10)))
        assert grid_argmax_continuous(cat, [1.0], 5.0).quantities == (0.0,)

    def test_inequality_mask(self):
        u = Uniform(0, 10)
        cat = Catalog.of((Product("a", 1, 1), u), (Product("b", 1, 1), u))
        plan = grid_argmax_continuous(cat, [10, 10], 0.05, LinearConstraint((1, 1), 6, "le"))
        np.testing.assert_allclose(plan.quantities, (3, 3), atol=0.05)

    def test_errors(self):
        u = Uniform(0, 10)
        cat = Catalog.of((Product("a", 1, 1), u), (Product("b", 1, 1), u))
        with pytest.raises(InfeasibleWithinBounds):
            grid_argmax_continuous(cat, [1, 1], 0.1, LinearConstraint((1, 1), 5, "eq"))
        with pytest.raises(BudgetExceeded):
            grid_argmax_continuous(cat, [10, 10], 1e-4)
        with pytest.raises(DomainError):
            grid_argmax_continuous(cat, [10, 10], 0)
