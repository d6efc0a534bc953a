from itertools import combinations
from math import log

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from bntest import BayesNet, DagStructure, sample
from bntest.core import beta_exact, tree_nondegeneracy
from bntest.core.sampling import BatchSource, NetSource, ProductSource
from bntest.errors import InfeasibleMoments, InvalidParameter, TripleEnumerationCapExceeded
from bntest.structure import (MomentTable, TreeTestParameters, chow_liu, ci_sample_size,
                              conditional_covariance_stat, conditional_independence_test,
                              exact_mutual_information, maximum_spanning_tree, mi_from_joint,
                              mi_from_moments, recover_skeleton, skeleton_edges, structure_test,
                              tree_sample_size, tree_structure_test)

from conftest import collider


def random_tree(rng, n, lo=1 / 3, hi=2 / 3):
    parents = tuple(() if i == 0 else (int(rng.integers(0, i)),) for i in range(n))
    return BayesNet(DagStructure(n, parents), tuple(rng.uniform(lo, hi, 1 << len(p)) for p in parents))


def mi_oracle(p00, p10, p01, p11):
    """Mutual information in bits as H(X) + H(Y) - H(X, Y)."""
    hx = stats.entropy([p00 + p01, p10 + p11], base=2)
    hy = stats.entropy([p00 + p10, p01 + p11], base=2)
    return hx + hy - stats.entropy([p00, p10, p01, p11], base=2)


class TestMutualInformation:
    def test_independent(self):
        assert mi_from_moments(0.3, 0.6, 0.18) == pytest.approx(0, abs=1e-15)

    def test_identical_fair_bits(self):
        assert mi_from_moments(0.5, 0.5, 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_frozen_value(self):
        assert mi_from_moments(0.5, 0.5, 0.3) == pytest.approx(0.029049405545330975, abs=1e-12)

    def test_infeasible(self):
        with pytest.raises(InfeasibleMoments):
            mi_from_moments(0.3, 0.4, 0.5)
        with pytest.raises(InfeasibleMoments):
            mi_from_moments(0.8, 0.8, 0.5)

    def test_grid_against_entropy_oracle(self):
        g = np.linspace(0, 1, 50)
        x, y, z = (a.ravel() for a in np.meshgrid(g, g, g, indexing="ij"))
        keep = (z <= np.minimum(x, y)) & (1 + z - x - y >= 0)
        x, y, z = x[keep], y[keep], z[keep]
        cells = np.clip(np.stack([1 - x - y + z, x - z, y - z, z]), 0, None)
        hx = stats.entropy(np.stack([cells[0] + cells[2], cells[1] + cells[3]]), base=2)
        hy = stats.entropy(np.stack([cells[0] + cells[1], cells[2] + cells[3]]), base=2)
        want = hx + hy - stats.entropy(cells, base=2)
        assert x.size > 10000
        np.testing.assert_allclose(mi_from_moments(x, y, z), want, atol=1e-10)

    def test_joint_form(self):
        assert mi_from_joint(0.3, 0.2, 0.2, 0.3) == pytest.approx(mi_oracle(0.3, 0.2, 0.2, 0.3), abs=1e-12)


class TestChowLiu:
    def test_two_nodes(self):
        net = BayesNet(DagStructure(2, ((), (0,))), (np.array([0.5]), np.array([0.3, 0.6])))
        assert chow_liu(net) == [(0, 1)]

    def test_tie_break(self):
        assert maximum_spanning_tree(np.zeros((4, 4))) == [(0, 1), (0, 2), (0, 3)]
        assert chow_liu(BayesNet.product([0.5, 0.3, 0.7, 0.5])) == [(0, 1), (0, 2), (0, 3)]

    def test_recovers_n7_tree(self):
        rng = np.random.default_rng(3)
        Q = random_tree(rng, 7)
        assert chow_liu(Q) == skeleton_edges(Q.structure)

    def test_monotone_invariance(self, rng):
        w = rng.uniform(0, 1, (6, 6))
        w = (w + w.T) / 2
        base = maximum_spanning_tree(w)
        for f in (np.exp, np.sqrt, lambda a: 3 * a + 1, lambda a: a ** 3):
            assert maximum_spanning_tree(f(w)) == base

    def test_needs_two_nodes(self):
        with pytest.raises(InvalidParameter):
            chow_liu(np.zeros((1, 1)))

    def test_moment_table_invariant(self):
        b = sample(collider(), 2000, seed=1)
        mt = MomentTable.from_counts(b, tau=0.01)
        assert mt.check()
        mt2 = MomentTable.from_counts(b.table(), tau=0.01)
        np.testing.assert_allclose(mt.rho, mt2.rho, atol=1e-12)


class TestTreeLemmas:
    def test_gap_floor_and_recovery(self):
        rng = np.random.default_rng(0)
        c = 1 / 3
        for _ in range(100):
            n = int(rng.integers(3, 9))
            Q = random_tree(rng, n)
            gamma = tree_nondegeneracy(Q)
            adj = {frozenset(e) for e in skeleton_edges(Q.structure)}
            mi = {(i, j): exact_mutual_information(Q, i, j) for i, j in combinations(range(n), 2)}
            kappa = c * gamma ** 2 / (2 * log(2))
            for e in adj:
                assert mi[tuple(sorted(e))] >= kappa - 1e-12
            for (i, j), v in mi.items():
                if frozenset((i, j)) in adj:
                    continue
                path = _path(Q, i, j)
                floor = min(mi[tuple(sorted(e))] for e in zip(path, path[1:]))
                assert v <= (1 - 2 * c * c) * floor + 1e-12
            assert chow_liu(Q) == skeleton_edges(Q.structure)


def _path(Q, a, b):
    parent = {i: ps[0] for i, ps in enumerate(Q.parents) if ps}

    def up(v):
        out = [v]
        while v in parent:
            v = parent[v]
            out.append(v)
        return out

    ua, ub = up(a), up(b)
    common = next(v for v in ua if v in ub)
    return ua[:ua.index(common) + 1] + ub[:ub.index(common)][::-1]


class TestConditionalCovariance:
    def test_independent_coins(self):
        b = ProductSource([0.5, 0.5, 0.5], 0).draw(10**5)
        assert conditional_covariance_stat(b, 0, 1, [2]) < 0.02

    def test_noisy_xor(self):
        P = collider(0.9)
        b = sample(P, 10**5, seed=3)
        assert conditional_covariance_stat(b, 0, 1, [2]) == pytest.approx(beta_exact(P, 0, 1, [2]), abs=0.02)

    def test_identical_columns(self):
        col = (np.random.default_rng(1).random(1000) < 0.3).astype(np.uint8)
        b = BatchSource(np.stack([col, col], axis=1)).draw(1000)
        mu = col.mean()
        assert conditional_covariance_stat(b, 0, 1) == pytest.approx(mu * (1 - mu), abs=1e-12)

    def test_bad_indices(self):
        b = sample(collider(), 10, seed=0)
        with pytest.raises(InvalidParameter):
            conditional_covariance_stat(b, 0, 0)
        with pytest.raises(InvalidParameter):
            conditional_covariance_stat(b, 0, 1, [1])


class TestCITest:
    def test_sample_size(self):
        assert ci_sample_size(1, 0.3, 0.01) == int(np.ceil(200 * (2 + log(100)) / 0.09))

    def test_independent_accepts(self):
        acc = sum(conditional_independence_test(ProductSource([0.5, 0.4, 0.6], s), 0, 1, [2], 0.3).accepted
                  for s in range(20))
        assert acc == 20

    def test_dependent_rejects(self):
        P = collider(0.9)  # beta = 0.2 >= 3 gamma / 4 at gamma = 0.25
        rej = sum(not conditional_independence_test(NetSource(P, s), 0, 1, [2], 0.25).accepted
                  for s in range(20))
        assert rej == 20

    def test_boundary_is_closed(self):
        # columns 0 and 1 identical with mean 1/2: beta_hat = 1/4 exactly
        bits = np.array([[0, 0], [1, 1]] * 50, dtype=np.uint8)
        v = conditional_independence_test(BatchSource(bits), 0, 1, [], 0.75, m=100)
        assert v.statistic == v.threshold == 0.25 and v.accepted


class TestStructureTest:
    def test_cap(self):
        with pytest.raises(TripleEnumerationCapExceeded):
            structure_test(DagStructure(120, ((),) + tuple((i,) for i in range(119))),
                           ProductSource(np.full(120, 0.5), 0), 0.1, d=3)

    def test_true_vs_wrong(self):
        from bntest.harness.registry import make_source, v_structure_pair
        chain, wrong, order = v_structure_pair()
        from bntest.core import nondegeneracy_interval
        gamma = nondegeneracy_interval(chain).gamma_lower
        ok = structure_test(chain.structure, NetSource(chain, 1), gamma, d=1)
        bad = structure_test(chain.structure, make_source(wrong, np.random.default_rng(2), order), gamma, d=1)
        assert ok.accepted
        assert bad.decision == "reject" and bad.trigger == "ci-accept"

    def test_recover_skeleton(self):
        rng = np.random.default_rng(4)
        Q = random_tree(rng, 5, 0.15, 0.85)
        Q = Q.with_cpt([Q.cpt[0]] + [np.array([0.2, 0.8])] * 4)
        edges = recover_skeleton(NetSource(Q, 0).draw_table(200000), 5, 1, 0.1)
        assert edges == skeleton_edges(Q.structure)


class TestTreeTest:
    def test_parameters(self):
        p = TreeTestParameters.compute(1 / 3, 0.5)
        assert p.kappa == pytest.approx(0.06011229337037347, rel=1e-12)
        assert p.tau == pytest.approx(2.0186292916350083e-05, rel=1e-10)
        assert p.c_prime == pytest.approx(1 / 6)

    def test_sample_size(self):
        assert tree_sample_size(4, 0.01) == int(np.ceil(log(2 * 10 / 0.1) / (2 * 1e-4)))

    def test_exact_moments_accept(self):
        Q = BayesNet(DagStructure(3, ((), (0,), (1,))),
                     (np.array([0.5]), np.array([0.3, 0.7]), np.array([0.3, 0.7])))
        src = NetSource(Q, 0)
        m = 10**6
        src.draw_table = lambda k: _exact_table(Q, k)
        v = tree_structure_test(Q, src, 0.3, 0.4, m=m)
        assert v.accepted and v.statistic <= 1e-6

    def test_wrong_skeleton_rejects(self):
        Q = BayesNet(DagStructure(3, ((), (0,), (1,))),
                     (np.array([0.5]), np.array([0.2, 0.8]), np.array([0.2, 0.8])))
        P = BayesNet(DagStructure(3, ((), (0,), (0,))),
                     (np.array([0.5]), np.array([0.2, 0.8]), np.array([0.2, 0.8])))
        v = tree_structure_test(Q, NetSource(P, 1), 0.2, 0.6)
        assert v.decision == "reject"


def _exact_table(Q, m):
    from bntest.core.sampling import CountTable
    return CountTable(Q.n, np.rint(Q.joint * m).astype(np.int64))
