import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as ref
from conftest import FAST, families, measures, tree_measure_family, trees
from twoweight import (
    DisjointFamily,
    Infeasible,
    Instance,
    Measure,
    OptimizerOptions,
    ParameterError,
    ValidationError,
    build_tree,
    carleson_norm,
    cf_alpha,
    collection_value,
    disjoint_value,
    dlbo_ratio,
    equivalent_expressions,
    fw_characteristic,
    indicator,
    integral_condition,
    lambda_avg,
    lambda_gamma,
    lp_norm,
    mass_ratio,
    maximal_condition_values,
    multiplier_constant_estimate,
    multiplier_test,
    search_extremal,
    sparse_extract,
    wolff_condition,
    wolff_potential,
)
from twoweight.conditions import carleson_extremal_cube, collection_function


def random_case(seed, depth=2, zeros=0.0):
    rng = np.random.default_rng(seed)
    t = build_tree(1, depth)
    s = rng.exponential(size=t.n_leaves)
    w = rng.exponential(size=t.n_leaves) * (rng.random(t.n_leaves) >= zeros)
    lam = rng.exponential(size=t.n_cubes) * (rng.random(t.n_cubes) < 0.7)
    return t, Measure(t, s), Measure(t, w), lam


def single_cube(mass, depth=1):
    t = build_tree(1, depth)
    mu = Measure.uniform(t, mass)
    return t, mu, indicator(t, [t.root])


def assert_family_exact(fam, tree):
    fr = fam.fractions
    assert (fr >= 0).all() and (fr.sum(axis=0) <= 1 + 1e-12).all()
    outside = ~tree.containment.astype(bool)
    assert not fr[outside].any()


class TestCarleson:
    def test_root_only(self):
        t, mu, b = single_cube(3.0, 2)
        assert carleson_norm(b, mu) == 1.0
        assert carleson_extremal_cube(b, mu) == t.root

    @given(st.data())
    def test_disjoint_family_bounded_by_one(self, data):
        t = data.draw(trees())
        mu = data.draw(measures(t))
        n = t.n_leaves
        raw = np.array(data.draw(st.lists(st.floats(0, 1), min_size=t.n_cubes * n, max_size=t.n_cubes * n)))
        fr = raw.reshape(t.n_cubes, n) * t.containment
        fr = fr / np.maximum(fr.sum(axis=0), 1.0)
        fam = DisjointFamily(t, fr)
        b = np.where(mu.cube_mass > 0, fam.masses(mu) / np.where(mu.cube_mass > 0, mu.cube_mass, 1), 0.0)
        assert carleson_norm(b, mu) <= 1 + 1e-12

    @given(tree_measure_family())
    def test_lp_identity(self, tmf):
        _, mu, b = tmf
        assert carleson_norm(b, mu) == lp_norm(b, math.inf, 1, mu)


class TestSparse:
    def test_root_only(self):
        t, mu, b = single_cube(2.0)
        fam = sparse_extract(b, mu, 1.0)
        assert fam.fractions[t.root].tolist() == [1.0, 1.0]

    def test_tight_fixture(self):
        t = build_tree(1, 1)
        mu = Measure(t, [1, 1])
        b = np.array([0.5, 0.5, 0.0])
        C = carleson_norm(b, mu)
        assert C == 0.75
        fam = sparse_extract(b, mu, C)
        masses = fam.masses(mu)
        assert masses.sum() == pytest.approx(mu.total, rel=1e-12)
        assert masses[0] == pytest.approx(4 / 3) and masses[1] == pytest.approx(2 / 3)
        bad = sparse_extract(b, mu, 0.6)
        assert isinstance(bad, Infeasible) and bad.cube == t.root
        assert bad.demand > bad.capacity

    @pytest.mark.parametrize("seed", range(10))
    def test_feasible_at_carleson_norm(self, seed):
        rng = np.random.default_rng(seed)
        t = build_tree(1, int(rng.integers(1, 5)))
        mu = Measure(t, rng.exponential(size=t.n_leaves) * (rng.random(t.n_leaves) < 0.85))
        b = rng.exponential(size=t.n_cubes) * (rng.random(t.n_cubes) < 0.6)
        C = carleson_norm(b, mu)
        if C == 0:
            return
        fam = sparse_extract(b, mu, C * (1 + 1e-9))
        assert isinstance(fam, DisjointFamily)
        assert_family_exact(fam, t)
        need = b * mu.cube_mass / (C * (1 + 1e-9))
        assert (fam.masses(mu) >= need - 1e-9 * mu.cube_mass).all()

    def test_bad_constant(self):
        t, mu, b = single_cube(1.0)
        with pytest.raises(ParameterError):
            sparse_extract(b, mu, 0.0)


class TestAInfinity:
    def test_same_measure(self):
        _, s, _, _ = random_case(0, 3)
        assert fw_characteristic(s, s) == pytest.approx(1.0, rel=1e-14)

    def test_dirac_omega(self):
        t = build_tree(1, 2)
        assert fw_characteristic(Measure.uniform(t), Measure(t, [0, 0, 1, 0])) == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(8))
    def test_reference_and_lower_bound(self, seed):
        t, s, w, _ = random_case(seed, 3, zeros=0.2)
        r = ref.RefTree(1, 3)
        val = fw_characteristic(s, w)
        assert val == pytest.approx(ref.fw(r, s.leaf_mass, w.leaf_mass), rel=1e-12)
        if w.total > 0:
            assert val >= 1 - 1e-12

    def test_cf_examples(self):
        t, s, _, _ = random_case(3, 2)
        for beta in (0.1, 0.5, 0.9):
            assert cf_alpha(s, s, beta) == pytest.approx(beta, rel=1e-12)
        assert cf_alpha(Measure(t, [0, 0, 5, 0]), Measure(t, [1, 1, 0, 1]), 0.2) == 1.0
        with pytest.raises(ParameterError):
            cf_alpha(s, s, 1.0)

    @given(st.data())
    def test_cf_monotone(self, data):
        t = data.draw(trees())
        s, w = data.draw(measures(t)), data.draw(measures(t))
        betas = sorted(data.draw(st.lists(st.floats(0.01, 0.99), min_size=2, max_size=4)))
        vals = [cf_alpha(s, w, b) for b in betas]
        assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))


class TestMultiplier:
    @pytest.mark.parametrize("seed", range(6))
    def test_fw_reduction(self, seed):
        _, s, w, _ = random_case(seed, 3, zeros=0.2)
        assert multiplier_test(mass_ratio(s, w), s, w) == fw_characteristic(s, w)

    def test_zero(self):
        _, s, w, _ = random_case(1)
        assert multiplier_test(np.zeros(7), s, w) == 0.0
        assert multiplier_constant_estimate(np.zeros(7), s, w).value == 0.0

    @pytest.mark.parametrize("seed", range(3))
    def test_family_form_comparable(self, seed):
        t, s, w, _ = random_case(seed, 2)
        m = np.random.default_rng(seed + 100).exponential(size=t.n_cubes)
        first = multiplier_test(m, s, w)
        second = multiplier_constant_estimate(m, s, w, OptimizerOptions(restarts=2, max_iters=60)).value
        assert first / 16 <= second <= 16 * first


class TestLambda:
    def test_root_only(self):
        t = build_tree(1, 2)
        w = Measure(t, [1, 2, 3, 4])
        lam = indicator(t, [t.root])
        assert lambda_avg(lam, w).tolist() == [1, 0, 0, 0, 0, 0, 0]
        for g in (-1, 0.5, 1, 2):
            assert lambda_gamma(lam, w, g, "sup")[t.root] == pytest.approx(1.0, rel=1e-14)

    def test_constant(self):
        t, _, w, _ = random_case(2, 2)
        big = lambda_avg(np.full(7, 3.0), w)
        sub = t.subtree_sum(w.cube_mass)
        assert np.allclose(big, 3 * sub / w.cube_mass, rtol=1e-13)

    @pytest.mark.parametrize("seed", range(5))
    def test_reference(self, seed):
        t, _, w, lam = random_case(seed, 3, zeros=0.2)
        r = ref.RefTree(1, 3)
        assert np.allclose(lambda_avg(lam, w), ref.lambda_avg(r, lam, w.leaf_mass), rtol=1e-12, atol=0)
        for g in (-1.0, 0.5, 2.0):
            assert np.allclose(lambda_gamma(lam, w, g), ref.lambda_gamma_sup(r, lam, w.leaf_mass, g), rtol=1e-11, atol=0)

    @given(tree_measure_family())
    def test_gamma_one_sum_is_average(self, tmf):
        _, w, lam = tmf
        assert np.allclose(lambda_gamma(lam, w, 1.0, "sum"), lambda_avg(lam, w), rtol=1e-11, atol=1e-300)

    @given(tree_measure_family())
    def test_monotone_in_gamma(self, tmf):
        _, w, lam = tmf
        vals = [lambda_gamma(lam, w, g) for g in (-1, 0.5, 1, 2)]
        for lo, hi in zip(vals, vals[1:]):
            assert (lo <= hi).all()
        live = w.cube_mass > 0
        for g in (0.5, 2.0):
            assert (lam[live] <= lambda_gamma(lam, w, g)[live] * (1 + 1e-12)).all()

    def test_bad_gamma(self):
        t, _, w, lam = random_case(0)
        with pytest.raises(ParameterError):
            lambda_gamma(lam, w, 0.0)
        with pytest.raises(ParameterError):
            lambda_gamma(lam, w, 1.0, "mean")


class TestWolff:
    def test_root_only(self):
        t, mu, lam = single_cube(2.0)
        assert np.allclose(wolff_potential(lam, mu, mu, 3.0), 1.0)
        v1, _ = wolff_condition(lam, mu, mu, 3.0, 2.0)
        assert v1 == pytest.approx(2 ** (1 / 6), rel=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_reference(self, seed):
        t, s, w, lam = random_case(seed, 2)
        r = ref.RefTree(1, 2)
        assert np.allclose(wolff_potential(lam, s, w, 3.0), ref.wolff(r, lam, s.leaf_mass, w.leaf_mass, 3.0), rtol=1e-12)
        adj = lam * mass_ratio(w, s)
        expect = ref.wolff(r, adj, w.leaf_mass, s.leaf_mass, 1.5)
        assert np.allclose(wolff_potential(lam, s, w, 1.5, dual=True), expect, rtol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_homogeneity(self, seed):
        _, s, w, lam = random_case(seed, 3)
        p = 3.0
        pd = p / (p - 1)
        assert np.allclose(wolff_potential(2 * lam, s, w, p), 2**pd * wolff_potential(lam, s, w, p), rtol=1e-13)
        a, b = wolff_condition(lam, s, w, 3.0, 2.0)
        a2, b2 = wolff_condition(2 * lam, s, w, 3.0, 2.0)
        assert abs(a2 / (2 * a) - 1) < 1e-12 and abs(b2 / (2 * b) - 1) < 1e-12

    def test_zero_and_range(self):
        _, s, w, _ = random_case(0)
        assert wolff_condition(np.zeros(7), s, w, 3.0, 2.0) == (0.0, 0.0)
        with pytest.raises(ParameterError):
            wolff_condition(np.ones(7), s, w, 3.0, 1.0)
        with pytest.raises(ParameterError):
            wolff_potential(np.ones(7), s, w, 1.0)


class TestIntegralAndScale:
    def test_integral_examples(self):
        _, mu, lam = single_cube(2.0)
        assert integral_condition(lam, mu, mu, 2, 1) == pytest.approx(2**0.5, rel=1e-14)
        assert integral_condition(np.zeros(3), mu, mu, 2, 1) == 0.0
        assert integral_condition(lam, mu, mu, 3, 2, dual=True) == pytest.approx(2 ** (1 / 6), rel=1e-14)

    @pytest.mark.parametrize("m", [2.0, 4.0, 8.0])
    @pytest.mark.parametrize("p,q", [(2, 1), (3, 2), (2, 0.5)])
    def test_scale_single_cube(self, m, p, q):
        _, mu, lam = single_cube(m, 2)
        S, N = maximal_condition_values(lam, mu, mu, p, q, q / 4)
        assert S == pytest.approx(m ** (1 / q - 1 / p), rel=1e-12)
        assert N == pytest.approx(m ** (1 / q - 1 / p), rel=1e-12)

    def test_scale_errors_and_zero(self):
        _, mu, lam = single_cube(2.0)
        assert maximal_condition_values(np.zeros(3), mu, mu, 2, 1, 0.5) == (0.0, 0.0)
        with pytest.raises(ParameterError):
            maximal_condition_values(lam, mu, mu, 2, 1, 1.0)

    @pytest.mark.parametrize("seed", range(6))
    def test_homogeneity(self, seed):
        _, s, w, lam = random_case(seed, 3, zeros=0.2)
        t = 3.7
        for dual in (False, True):
            assert integral_condition(t * lam, s, w, 3, 2, dual) == pytest.approx(t * integral_condition(lam, s, w, 3, 2, dual), rel=1e-12)
        S, N = maximal_condition_values(lam, s, w, 2, 1, 0.25)
        S2, N2 = maximal_condition_values(t * lam, s, w, 2, 1, 0.25)
        assert S2 == pytest.approx(t * S, rel=1e-12) and N2 == pytest.approx(t * N, rel=1e-12)


class TestConfigurations:
    def test_collection_root(self):
        _, mu, lam = single_cube(2.0)
        assert collection_value(lam, mu, mu, 2, 1, [0]) == pytest.approx(2.0)
        assert collection_value(np.zeros(3), mu, mu, 2, 1, [0]) == 0.0
        with pytest.raises(ValidationError):
            collection_value(lam, mu, mu, 2, 1, [])

    def test_collection_function_hand(self):
        t = build_tree(1, 1)
        lam = np.array([1.0, 3.0, 0.5])
        # x in left leaf: inf over {root: max(1, 3), left: 3}; right: inf{max(1, .5), .5}
        assert collection_function(lam, [0, 1, 2], t).tolist() == [3.0, 0.5]
        assert collection_function(lam, [1], t).tolist() == [3.0, 0.0]

    @pytest.mark.parametrize("seed", range(6))
    def test_collection_reference(self, seed):
        t, s, w, lam = random_case(seed, 2)
        r = ref.RefTree(1, 2)
        rng = np.random.default_rng(seed)
        for _ in range(5):
            coll = [c for c in range(7) if rng.random() < 0.5] or [0]
            got = collection_value(lam, s, w, 3, 2, coll)
            assert got == pytest.approx(ref.collection(r, lam, s.leaf_mass, w.leaf_mass, 3, 2, coll), rel=1e-12)

    def test_disjoint_examples(self):
        t, mu, lam = single_cube(2.0)
        full = DisjointFamily.from_assignment(t, [0, 0])
        assert disjoint_value(lam, mu, mu, 2, 1, full) == pytest.approx(2.0)
        assert disjoint_value(lam, mu, mu, 2, 1, DisjointFamily.empty(t)) == 0.0
        other = build_tree(1, 2)
        with pytest.raises(ValidationError):
            disjoint_value(lam, mu, mu, 2, 1, DisjointFamily.empty(other))

    @given(st.data())
    def test_disjoint_monotone(self, data):
        t = data.draw(trees(max_depth=2))
        s, w = data.draw(measures(t)), data.draw(measures(t))
        lam = data.draw(families(t))
        n = t.n_leaves
        assign = data.draw(st.lists(st.integers(-1, t.depth), min_size=n, max_size=n))
        cubes = [-1 if a < 0 else int(t.ancestors[l, a]) for l, a in enumerate(assign)]
        fam = DisjointFamily.from_assignment(t, cubes)
        half = DisjointFamily(t, fam.fractions / 2)
        assert disjoint_value(lam, s, w, 3, 1.5, half) <= disjoint_value(lam, s, w, 3, 1.5, fam) * (1 + 1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_search_collection_matches_exhaustive(self, seed):
        t, s, w, lam = random_case(seed, 2)
        inst = Instance(s, w, lam, 3.0, 2.0)
        r = ref.RefTree(1, 2)
        best = ref.best_collection(r, lam, s.leaf_mass, w.leaf_mass, 3.0, 2.0)
        ex = search_extremal("collection", inst, FAST, exhaustive_limit=7)
        assert ex.value == pytest.approx(best, rel=1e-12)
        local = search_extremal("collection", inst, FAST)
        assert local.value == pytest.approx(collection_value(lam, s, w, 3.0, 2.0, local.witness), rel=1e-12)
        assert local.value >= 0.95 * best

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("p,q", [(3.0, 1.0), (2.0, 1.5)])
    def test_search_disjoint_vs_vertices(self, seed, p, q):
        t, s, w, lam = random_case(seed, 2)
        inst = Instance(s, w, lam, p, q)
        r = ref.RefTree(1, 2)
        vertex = ref.vertex_disjoint_best(r, lam, s.leaf_mass, w.leaf_mass, p, q)
        found = search_extremal("disjoint", inst, OptimizerOptions(restarts=4))
        assert found.value == pytest.approx(disjoint_value(lam, s, w, p, q, found.witness), rel=1e-12)
        assert found.value >= vertex * (1 - 1e-9)
        if (p - q) / q >= 1:
            # convex in the shares: the optimum sits at a vertex
            assert found.value == pytest.approx(vertex, rel=1e-9)

    def test_search_kind(self):
        t, s, w, lam = random_case(0)
        with pytest.raises(ParameterError):
            search_extremal("other", Instance(s, w, lam, 2, 1))


class TestDlbo:
    def test_examples(self):
        t = build_tree(1, 2)
        assert dlbo_ratio(np.full(7, 2.0), t) == 1.0
        assert dlbo_ratio(indicator(t, [t.cube_from_path("2:1")]), t) == math.inf
        assert dlbo_ratio(np.array([4, 2, 2, 1, 1, 1, 1.0]), t) == 1.0
        assert dlbo_ratio(np.array([1, 3, 1, 0, 0, 0, 0.0]), t) == 3.0
        assert dlbo_ratio(np.zeros(7), t) == 1.0


class TestEquivalentExpressions:
    def test_single_cube(self):
        t = build_tree(1, 2)
        mu = Measure(t, [1, 2, 3, 4])
        for p in (1.5, 2.0, 3.0):
            e = equivalent_expressions(2.0 * indicator(t, [t.root]), p, mu)
            assert e.e1 == e.e2 == e.e3 == pytest.approx(2.0**p * 10, rel=1e-14)
        assert equivalent_expressions(np.zeros(7), 2, mu) == (0.0, 0.0, 0.0)

    def test_random_comparable(self):
        rng = np.random.default_rng(0)
        worst = 1.0
        for _ in range(50):
            t = build_tree(1, int(rng.integers(1, 5)))
            mu = Measure(t, rng.exponential(size=t.n_leaves))
            a = rng.exponential(size=t.n_cubes) * (rng.random(t.n_cubes) < 0.6)
            e = equivalent_expressions(a, 2.0, mu)
            if min(e) == 0:
                assert max(e) == 0
                continue
            worst = max(worst, max(e) / min(e))
        assert worst <= 32

    def test_bad_p(self):
        with pytest.raises(ParameterError):
            equivalent_expressions(np.ones(1), 1.0, Measure(build_tree(1, 0), [1]))
