import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bntest import BayesNet, DagStructure, ProductSpec
from bntest.core import (balancedness, config_probabilities, exact_joint, parent_config_prob,
                         validate_structure)
from bntest.core.dag import ParentalConfiguration
from bntest.core.tables import code_of, marginal
from bntest.errors import CycleDetected, EnumerationCapExceeded, ParentIndexOutOfRange

from conftest import as_vector, brute_joint, chain2, random_net


class TestValidateStructure:
    def test_chain(self):
        s = validate_structure([[], [0]])
        assert s.parents == ((), (0,)) and s.d == 1

    def test_two_cycle(self):
        with pytest.raises(CycleDetected):
            validate_structure([[1], [0]])

    def test_collider(self):
        s = validate_structure([[], [], [0, 1]])
        assert s.d == 2
        assert s.v_structures() == {(0, 1, 2)}

    def test_out_of_range(self):
        with pytest.raises(ParentIndexOutOfRange):
            validate_structure([[], [5]])

    def test_relabels_to_topological_order(self):
        s = validate_structure([[1], [], [0]])
        assert all(p < i for i, ps in enumerate(s.parents) for p in ps)
        # order[new] = original label
        assert s.order == (1, 0, 2)

    def test_longer_cycle(self):
        with pytest.raises(CycleDetected):
            validate_structure([[2], [0], [1]])


class TestExactJoint:
    def test_uniform_two_nodes(self):
        net = BayesNet.product([0.5, 0.5])
        np.testing.assert_allclose(exact_joint(net), 0.25)

    def test_chain_entries(self):
        j = exact_joint(chain2())
        # index = x0 + 2 x1
        assert j[2] == pytest.approx(0.05, abs=1e-15)
        assert j[3] == pytest.approx(0.45, abs=1e-15)
        np.testing.assert_allclose(j, [0.45, 0.05, 0.05, 0.45], atol=1e-15)

    def test_cap(self):
        net = BayesNet.product([0.5] * 4)
        with pytest.raises(EnumerationCapExceeded):
            exact_joint(net, cap=3)

    def test_matches_brute_force(self, rng):
        for _ in range(30):
            net = random_net(rng, int(rng.integers(1, 7)), 3)
            np.testing.assert_allclose(exact_joint(net), as_vector(brute_joint(net), net.n),
                                       atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 3), st.integers(0, 2**31 - 1))
    def test_normalized(self, n, d, seed):
        net = random_net(np.random.default_rng(seed), n, d, 0.0, 1.0)
        assert abs(exact_joint(net).sum() - 1) <= 1e-12


class TestParentConfigProb:
    def test_root(self):
        assert parent_config_prob(chain2(), (0, ())) == (1.0, 0.0)

    def test_chain_child(self):
        pr, hw = parent_config_prob(chain2(), ParentalConfiguration(1, (1,)))
        assert pr == pytest.approx(0.5) and hw == 0.0

    def test_v_structure(self):
        s = validate_structure([[], [], [0, 1]])
        net = BayesNet(s, (np.array([0.5]), np.array([0.5]), np.array([0.1, 0.2, 0.3, 0.4])))
        assert parent_config_prob(net, (2, (1, 1)))[0] == pytest.approx(0.25)

    def test_monte_carlo_fallback(self):
        net = chain2()
        pr, hw = parent_config_prob(net, (1, (1,)), cap=1, rng=np.random.default_rng(0))
        assert hw > 0 and abs(pr - 0.5) < 4 * hw


class TestBalancedness:
    def test_uniform(self):
        r = balancedness(BayesNet.product([0.5, 0.5, 0.5]))
        assert (r.c, r.C) == (0.5, 1.0)

    def test_chain(self):
        r = balancedness(chain2())
        assert r.c == pytest.approx(0.1) and r.C == pytest.approx(0.5)

    def test_deterministic_entry(self):
        assert balancedness(BayesNet.product([0.5, 1.0])).c == 0.0

    def test_config_probabilities_sum_to_one(self, rng):
        net = random_net(rng, 6, 2)
        for pr in config_probabilities(net):
            assert pr.sum() == pytest.approx(1.0, abs=1e-12)


class TestTables:
    def test_marginal_matches_bincount(self, rng):
        n = 5
        t = rng.dirichlet(np.ones(1 << n))
        for coords in ([0], [3, 1], [4, 0, 2]):
            want = np.bincount(code_of(n, coords), weights=t, minlength=1 << len(coords))
            np.testing.assert_allclose(marginal(t, n, coords), want, atol=1e-15)


class TestSerialisation:
    def test_round_trip(self, rng):
        net = random_net(rng, 6, 2)
        back = BayesNet.from_json(net.to_json())
        assert back.parents == net.parents
        for a, b in zip(back.cpt, net.cpt):
            np.testing.assert_array_equal(a, b)

    def test_assignment_order(self):
        obj = {"n": 3, "parents": [[], [], [0, 1]],
               "cpt": [{"node": 0, "assignment": "", "p": 0.5}, {"node": 1, "assignment": "", "p": 0.5},
                       {"node": 2, "assignment": "00", "p": 0.1}, {"node": 2, "assignment": "10", "p": 0.2},
                       {"node": 2, "assignment": "01", "p": 0.3}, {"node": 2, "assignment": "11", "p": 0.4}]}
        net = BayesNet.from_dict(obj)
        # first character of the bitstring is the lowest-index parent
        assert net.p((2, (1, 0))) == 0.2 and net.p((2, (0, 1))) == 0.3
        assert json.loads(json.dumps(net.to_dict())) == net.to_dict()

    def test_relabelled_joint_is_preserved(self):
        # node 0 has parent 1 in the input; the joint over original labels must survive
        obj = {"n": 2, "parents": [[1], []],
               "cpt": [{"node": 0, "assignment": "0", "p": 0.2}, {"node": 0, "assignment": "1", "p": 0.7},
                       {"node": 1, "assignment": "", "p": 0.4}]}
        net = BayesNet.from_dict(obj)
        order = net.structure.order
        j = net.joint
        # Pr[orig0=1, orig1=1] = 0.4 * 0.7
        new = {orig: k for k, orig in enumerate(order)}
        idx = (1 << new[0]) | (1 << new[1])
        assert j[idx] == pytest.approx(0.28)

    def test_missing_entry(self):
        with pytest.raises(ValueError):
            BayesNet.from_dict({"n": 1, "parents": [[]], "cpt": []})

    def test_product_spec_bounds(self):
        with pytest.raises(ValueError):
            ProductSpec(np.array([1.2]))
        assert ProductSpec.from_dict(ProductSpec(np.array([0.1, 0.9])).to_dict()).n == 2


def test_flipped_is_involution(rng):
    net = random_net(rng, 5, 2)
    back = net.flipped([1, 3]).flipped([1, 3])
    for a, b in zip(back.cpt, net.cpt):
        np.testing.assert_allclose(a, b)


def test_flipped_joint(rng):
    net = random_net(rng, 4, 2)
    f = net.flipped([0, 2])
    idx = np.arange(16)
    np.testing.assert_allclose(f.joint, net.joint[idx ^ 0b0101], atol=1e-15)


def test_dag_helpers():
    s = DagStructure.from_edges(4, [(2, 0), (1, 3), (0, 3)])
    assert s.parents == ((), (), (0,), (0, 1))
    assert s.edges() == [(0, 2), (0, 3), (1, 3)]
    assert s.num_configurations == 1 + 1 + 2 + 4
    assert len(list(s.configurations())) == s.num_configurations
