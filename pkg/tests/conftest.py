"""Shared helpers: brute-force oracles written independently of the library."""
from itertools import product as iproduct

import numpy as np
import pytest

from bntest import BayesNet, DagStructure


def brute_joint(net: BayesNet) -> dict:
    """Map each tuple x to Pr[x] by multiplying one Bernoulli factor per node."""
    out = {}
    for x in iproduct((0, 1), repeat=net.n):
        pr = 1.0
        for i, ps in enumerate(net.parents):
            code = sum(x[p] << k for k, p in enumerate(ps))
            q = net.cpt[i][code]
            pr *= q if x[i] else 1 - q
        out[x] = pr
    return out


def as_vector(joint: dict, n: int) -> np.ndarray:
    v = np.zeros(1 << n)
    for x, pr in joint.items():
        v[sum(b << i for i, b in enumerate(x))] = pr
    return v


def random_structure(rng, n: int, d: int) -> DagStructure:
    parents = []
    for i in range(n):
        k = int(rng.integers(0, min(d, i) + 1))
        parents.append(tuple(sorted(rng.choice(i, size=k, replace=False).tolist())) if k else ())
    return DagStructure(n, tuple(parents))


def random_net(rng, n: int, d: int, lo: float = 0.05, hi: float = 0.95,
               structure: DagStructure | None = None) -> BayesNet:
    s = structure or random_structure(rng, n, d)
    return BayesNet(s, tuple(rng.uniform(lo, hi, 1 << len(ps)) for ps in s.parents))


def chain2() -> BayesNet:
    return BayesNet(DagStructure(2, ((), (0,))), (np.array([0.5]), np.array([0.1, 0.9])))


def collider(p_xor: float = 0.9) -> BayesNet:
    """Fair roots 0, 1 and node 2 equal to their xor with probability ``p_xor``."""
    q = 1 - p_xor
    return BayesNet(DagStructure(3, ((), (), (0, 1))),
                    (np.array([0.5]), np.array([0.5]), np.array([q, p_xor, p_xor, q])))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
