import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from arimacopula.copula import FittedCopula, pseudo_observations, sample
from arimacopula.errors import FamilyIncompatible
from arimacopula.gof import (
    GofResult,
    cvm_statistic,
    derive_seeds,
    empirical_copula,
    gof_bootstrap,
    independence_test_multivariate,
)

TOY = np.array([[0.25, 0.5], [0.5, 0.25], [0.75, 0.75]])


def brute_empirical(u, point):
    return sum(all(u[i, j] <= point[j] for j in range(len(point))) for i in range(len(u))) / len(u)


class TestEmpiricalCopula:
    def test_corners(self):
        assert empirical_copula(TOY, (1.0, 1.0)) == 1.0
        assert empirical_copula(TOY, (0.0, 0.0)) == 0.0

    def test_toy_point(self):
        assert empirical_copula(TOY, (0.5, 0.5)) == pytest.approx(2 / 3, abs=1e-15)

    def test_vectorised_matches_loop(self):
        rng = np.random.default_rng(0)
        u = rng.random((40, 3))
        pts = rng.random((25, 3))
        got = empirical_copula(u, pts)
        np.testing.assert_array_equal(got, [brute_empirical(u, p) for p in pts])


class TestCvm:
    def test_toy_hand_sum(self):
        # C_n at the three points: 1/3, 1/3, 1; independence: .125, .125, .5625
        expected = (1 / 3 - 0.125) ** 2 * 2 + (1 - 0.5625) ** 2
        got = cvm_statistic(TOY, FittedCopula("independence"))
        assert got == pytest.approx(expected, abs=1e-12)

    def test_brute_force_against_parametric(self):
        rng = np.random.default_rng(1)
        u = pseudo_observations(rng.random((30, 2)))
        c = FittedCopula("clayton", 1.3)
        th = c.theta
        ref = sum((brute_empirical(u, p) - (p[0] ** -th + p[1] ** -th - 1) ** (-1 / th)) ** 2 for p in u)
        assert cvm_statistic(u, c) == pytest.approx(ref, abs=1e-12)

    def test_oracle_injection_is_zero(self):
        u = pseudo_observations(np.random.default_rng(2).random((50, 2)))
        oracle = lambda a, b: empirical_copula(u, np.column_stack([a, b]))  # noqa: E731
        assert cvm_statistic(u, oracle) == 0.0

    def test_non_negative(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            u = pseudo_observations(rng.random((20, 2)))
            assert cvm_statistic(u, FittedCopula("frank", rng.normal() * 3 + 0.1)) >= 0

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.integers(-1000, 1000), st.integers(-1000, 1000)), min_size=5, max_size=30,
                    unique_by=(lambda t: t[0], lambda t: t[1])))
    def test_invariant_to_increasing_transforms(self, pairs):
        x = np.array(pairs, dtype=float)
        t = np.column_stack([np.arctan(x[:, 0] / 50), x[:, 1] ** 3])
        c = FittedCopula("gumbel", 1.7)
        assert cvm_statistic(pseudo_observations(x), c) == cvm_statistic(pseudo_observations(t), c)

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            cvm_statistic(TOY[:1], FittedCopula("independence"))


class TestBootstrap:
    u = sample(FittedCopula("clayton", 1.0), 120, 7)

    def test_p_on_lattice(self):
        r = gof_bootstrap(self.u, "clayton", n_boot=150, seed=3)
        k = r.p_value * 151
        assert abs(k - round(k)) < 1e-9 and 1 <= round(k) <= 151
        assert r.s_n >= 0 and 0 <= r.p_value <= 1 and r.n_bootstrap == 150 and r.seed == 3

    def test_deterministic(self):
        a = gof_bootstrap(self.u, "frank", n_boot=100, seed=11)
        b = gof_bootstrap(self.u, "frank", n_boot=100, seed=11)
        assert a == b and repr(a) == repr(b)

    def test_parallel_equals_serial(self):
        a = gof_bootstrap(self.u, "gumbel", n_boot=120, seed=5)
        b = gof_bootstrap(self.u, "gumbel", n_boot=120, seed=5, n_jobs=3)
        assert a == b

    def test_power_against_gumbel(self):
        rej = 0
        for i in range(20):
            u = sample(FittedCopula("clayton", 3.0), 200, 1000 + i)
            rej += gof_bootstrap(u, "gumbel", n_boot=200, seed=i).p_value < 0.05
        assert rej >= 16

    def test_null_p_values_spread(self):
        ps = [gof_bootstrap(sample(FittedCopula("clayton", 0.5), 150, 500 + i), "clayton",
                            n_boot=150, seed=i).p_value for i in range(40)]
        assert stats.kstest(ps, "uniform").statistic < 0.25

    def test_incompatible_family(self):
        u = sample(FittedCopula("normal", -0.6), 200, 1)
        with pytest.raises(FamilyIncompatible):
            gof_bootstrap(u, "clayton", n_boot=100)

    def test_min_replicates(self):
        with pytest.raises(ValueError):
            gof_bootstrap(self.u, "clayton", n_boot=99)

    def test_result_fields(self):
        r = GofResult("t", 0.3, 0.02, 0.5, 100, 1, 25.0)
        assert r.to_dict()["df"] == 25.0

    def test_seed_derivation(self):
        a = [s.generate_state(2).tolist() for s in derive_seeds(9, 4)]
        b = [s.generate_state(2).tolist() for s in derive_seeds(9, 6)[:4]]
        assert a == b and len({tuple(x) for x in a}) == 4


class TestIndependence:
    def test_comonotone(self):
        x = np.random.default_rng(0).standard_normal(60)
        r = independence_test_multivariate(np.column_stack([x, x, x]), n_perm=199, seed=1)
        assert r.p_value <= 1 / 200 + 1e-15

    def test_null_size(self):
        rng = np.random.default_rng(1)
        ps = [independence_test_multivariate(rng.random((150, 3)), n_perm=100, seed=i).p_value
              for i in range(40)]
        assert stats.kstest(ps, "uniform").statistic < 0.25

    def test_jointly_dependent_pairwise_independent(self):
        # sign(Z) = sign(X) sign(Y): each pair is independent, the triple is not
        rng = np.random.default_rng(2)
        hits = 0
        for i in range(10):
            x, y, w = rng.standard_normal((3, 250))
            z = np.abs(w) * np.sign(x * y)
            hits += independence_test_multivariate(np.column_stack([x, y, z]), n_perm=200, seed=i).p_value < 0.05
        assert hits >= 9

    def test_deterministic(self):
        d = np.random.default_rng(3).random((40, 2))
        assert independence_test_multivariate(d, 100, 4) == independence_test_multivariate(d, 100, 4)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            independence_test_multivariate(np.random.default_rng(0).random((20, 1)), 100)
        with pytest.raises(ValueError):
            independence_test_multivariate(np.random.default_rng(0).random((20, 2)), 50)
