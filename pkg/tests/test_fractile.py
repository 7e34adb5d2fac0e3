import math

import numpy as np
import pytest

from stockwise import (
    Catalog,
    Exponential,
    Geometric,
    NotContinuous,
    PiecewiseEmpirical,
    Poisson,
    Product,
    TableDemand,
    TruncatedNormal,
    UnboundedQuantile,
    Uniform,
    brute_force_argmax_discrete,
    cdf_at,
    concavity_certificate,
    critical_fractile,
    expected_profit,
    expected_profit_term,
    expected_profit_term_continuous,
    expected_profit_term_discrete,
    optimal_continuous,
    optimal_discrete,
    solve,
)

from conftest import random_product, random_table


class TestCriticalFractile:
    @pytest.mark.parametrize("c, s, want", [(1, 1, 0.5), (2, 1, 2 / 3), (3, 0, 1.0)])
    def test_values(self, c, s, want):
        assert critical_fractile(Product("a", c, s)) == want


class TestOptimalContinuous:
    def test_uniform_median(self):
        assert optimal_continuous(Product("a", 1, 1), Uniform(0, 10)) == 5.0

    def test_exponential(self):
        assert optimal_continuous(Product("a", 2, 1), Exponential(1)) == pytest.approx(math.log(3), abs=1e-9)

    def test_shifted_uniform(self):
        assert optimal_continuous(Product("a", 3, 1), Uniform(2, 6)) == pytest.approx(5.0, abs=1e-12)

    def test_zero_loss_bounded_orders_support_max(self):
        assert optimal_continuous(Product("a", 3, 0), Uniform(2, 6)) == 6.0

    def test_zero_loss_unbounded(self):
        with pytest.raises(UnboundedQuantile, match="unbounded order quantity"):
            optimal_continuous(Product("a", 3, 0), Exponential(1))

    def test_rejects_discrete(self):
        with pytest.raises(NotContinuous):
            optimal_continuous(Product("a", 1, 1), Poisson(2))

    @pytest.mark.parametrize("d", [Uniform(1, 9), Exponential(0.4), TruncatedNormal(5, 2), TruncatedNormal(2, 4, lo=1)], ids=repr)
    @pytest.mark.parametrize("c, s", [(1, 1), (2, 1), (0.5, 4), (9, 0.2)])
    def test_stationarity(self, d, c, s):
        p = Product("a", c, s)
        n = optimal_continuous(p, d)
        assert abs(c - (c + s) * cdf_at(d, n)) <= 1e-8

    @pytest.mark.parametrize(
        "d",
        [Uniform(1, 9), Exponential(0.4), TruncatedNormal(5, 2), PiecewiseEmpirical((0, 2, 5, 9), (1, 0.5, 3))],
        ids=repr,
    )
    @pytest.mark.parametrize("c, s", [(1, 1), (2, 1), (0.5, 4), (9, 0.2)])
    def test_local_dominance(self, d, c, s):
        p = Product("a", c, s)
        n = optimal_continuous(p, d)
        best = expected_profit_term_continuous(p, d, n)
        for delta in (0.01 * n, 1.0):
            for m in (n - delta, n + delta):
                if m >= 0:
                    assert best >= expected_profit_term_continuous(p, d, m) - 1e-12


class TestOptimalDiscrete:
    def test_coin_tie_breaks_low(self, coin):
        assert optimal_discrete(Product("a", 1, 1), coin) == 0

    def test_poisson_against_enumeration(self):
        p = Product("a", 2, 1)
        values = [expected_profit_term_discrete(p, Poisson(3), n) for n in range(31)]
        assert int(np.argmax(values)) == 4
        assert optimal_discrete(p, Poisson(3)) == 4

    def test_point_demand(self):
        assert optimal_discrete(Product("a", 9, 1), TableDemand({2: 1.0})) == 2

    def test_zero_loss_finite_support(self):
        assert optimal_discrete(Product("a", 1, 0), TableDemand({1: 0.3, 6: 0.7})) == 6

    def test_zero_loss_table_short_of_one_by_rounding(self):
        # masses sum to 1 - 1.1e-16 in floating point
        d = TableDemand({0: 0.1, 1: 0.2, 2: 0.7})
        assert optimal_discrete(Product("a", 1, 0), d) == 2

    def test_zero_loss_infinite_support(self):
        with pytest.raises(UnboundedQuantile):
            optimal_discrete(Product("a", 1, 0), Geometric(0.5))

    def test_randomized_matches_brute_force(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            p, d = random_product(rng), random_table(rng)
            n = optimal_discrete(p, d)
            bound = d.support_max + 1
            assert brute_force_argmax_discrete(Catalog.of((p, d)), [bound]).quantities == (n,)

    def test_exact_tie_both_optimal(self, coin):
        p = Product("a", 1, 1)
        n = optimal_discrete(p, coin)
        a = expected_profit_term_discrete(p, coin, n)
        b = expected_profit_term_discrete(p, coin, n + 1)
        assert abs(a - b) <= 1e-12

    @pytest.mark.parametrize("d", [Poisson(3), Poisson(25), Geometric(0.2), TableDemand({0: 0.1, 4: 0.5, 9: 0.4})], ids=repr)
    def test_neighbors_not_better(self, d):
        for c, s in [(1, 1), (2, 1), (0.5, 4), (9, 0.2)]:
            p = Product("a", c, s)
            n = optimal_discrete(p, d)
            best = expected_profit_term_discrete(p, d, n)
            assert best >= expected_profit_term_discrete(p, d, n + 1) - 1e-12
            if n > 0:
                assert best >= expected_profit_term_discrete(p, d, n - 1) - 1e-12


class TestComparativeStatics:
    GRID = [0.2, 0.5, 1.0, 2.0, 3.5, 7.0]

    @pytest.mark.parametrize("d", [Exponential(0.5), TruncatedNormal(8, 3), Poisson(6), TableDemand({1: 0.2, 3: 0.3, 4: 0.5})], ids=repr)
    def test_monotone_in_profit_and_loss(self, d):
        def opt(c, s):
            p = Product("a", c, s)
            return optimal_discrete(p, d) if d.is_discrete else optimal_continuous(p, d)

        for s in self.GRID:
            ns = [opt(c, s) for c in self.GRID]
            assert ns == sorted(ns)
        for c in self.GRID:
            ns = [opt(c, s) for s in self.GRID]
            assert ns == sorted(ns, reverse=True)

    @pytest.mark.parametrize("scale", [0.01, 0.5, 3.0, 1000.0])
    def test_scale_invariance(self, scale):
        # scales chosen so c/(c+s) rounds identically
        for d in (Poisson(6), TableDemand({0: 0.25, 2: 0.25, 5: 0.5}), Uniform(0, 4), Exponential(2)):
            p, q = Product("a", 3, 1), Product("a", 3 * scale, 1 * scale)
            assert critical_fractile(p) == critical_fractile(q)
            if d.is_discrete:
                assert optimal_discrete(p, d) == optimal_discrete(q, d)
            else:
                assert optimal_continuous(p, d) == optimal_continuous(q, d)


class TestSolve:
    def test_uniform_pair(self):
        u = Uniform(0, 10)
        report = solve(Catalog.of((Product("a", 1, 1), u), (Product("b", 1, 1), u)))
        assert report.plan.quantities == (5.0, 5.0)
        assert report.expected_profit == pytest.approx(5.0, abs=1e-12)
        assert report.method == "continuous_fractile"

    def test_single_poisson(self):
        report = solve(Catalog.of((Product("a", 2, 1), Poisson(3))))
        assert report.plan.quantities == (4,)
        assert report.method == "discrete_forward_difference"
        sol = report.per_product[0]
        assert sol.fractile == pytest.approx(2 / 3)
        assert sol.cdf_at_n == pytest.approx(0.8152632445237721, abs=1e-15)
        assert sol.stationarity_residual < 0

    def test_mixed_catalog_is_separable(self):
        entries = [
            (Product("a", 2, 1), Poisson(3)),
            (Product("b", 1, 1), Uniform(0, 10)),
            (Product("c", 4, 2), TruncatedNormal(7, 2)),
        ]
        report = solve(Catalog(tuple(entries)))
        assert report.method == "mixed"
        for k, (p, d) in enumerate(entries):
            alone = solve(Catalog.of((p, d)))
            assert report.plan[k] == alone.plan[0]
            assert report.per_product[k] == alone.per_product[0]
        want = sum(expected_profit_term(p, d, n) for (p, d), n in zip(entries, report.plan))
        assert report.expected_profit == pytest.approx(want, abs=1e-12)

    def test_unbounded_product_named(self):
        cat = Catalog.of((Product("ok", 1, 1), Uniform(0, 1)), (Product("widget", 1, 0), Exponential(1)))
        with pytest.raises(UnboundedQuantile, match="widget"):
            solve(cat)


class TestConcavityCertificate:
    def test_uniform_pair(self):
        u = Uniform(0, 10)
        cat = Catalog.of((Product("a", 1, 1), u), (Product("b", 1, 1), u))
        d1, d2, verdict = concavity_certificate(cat, [5, 5])
        assert d1 == pytest.approx(-0.2, abs=1e-15)
        assert d2 == pytest.approx(0.04, abs=1e-15)
        assert verdict

    def test_exponential_pair(self):
        e = Exponential(1)
        cat = Catalog.of((Product("a", 2, 1), e), (Product("b", 2, 1), e))
        n = math.log(3)
        d1, d2, verdict = concavity_certificate(cat, [n, n])
        assert d1 == pytest.approx(-1.0, abs=1e-12)
        assert d2 == pytest.approx(1.0, abs=1e-12)
        assert verdict

    def test_outside_support_inconclusive(self):
        u = Uniform(0, 10)
        cat = Catalog.of((Product("a", 1, 1), u), (Product("b", 1, 1), u))
        assert not concavity_certificate(cat, [12, 5]).verdict

    def test_needs_continuous(self):
        cat = Catalog.of((Product("a", 1, 1), Poisson(2)), (Product("b", 1, 1), Uniform(0, 1)))
        with pytest.raises(NotContinuous):
            concavity_certificate(cat, [1, 0.5])

    def test_hessian_matches_finite_differences(self):
        cat = Catalog.of((Product("a", 3, 1), TruncatedNormal(6, 2)), (Product("b", 1, 2), Exponential(0.5)))
        plan = solve(cat).plan
        d1, d2, _ = concavity_certificate(cat, plan)
        h = 1e-3
        diag = []
        for k, (p, d) in enumerate(cat):
            n = plan[k]
            f = lambda x: expected_profit_term_continuous(p, d, x)
            diag.append((f(n + h) - 2 * f(n) + f(n - h)) / h**2)
        assert d1 == pytest.approx(diag[0], rel=1e-4)
        assert d2 == pytest.approx(diag[0] * diag[1], rel=1e-4)
