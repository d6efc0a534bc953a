"""Named instance families and tester adapters used by experiment configs.

A family builds an :class:`Instance`: a reference ``Q`` (explicit) and the
law ``P`` that the tester samples from.  Closeness testers sample from both.
Each tester adapter takes ``(instance, eps, rngs, params)`` where ``rngs`` are
independent generators for the P stream, the Q stream and the tester itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import bn_testers, instances, product, structure
from ..core.dag import DagStructure
from ..core.net import BayesNet, ProductSpec
from ..core.nondegeneracy import nondegeneracy_interval
from ..core.sampling import NetSource, PermutedSource, ProductSource, SampleSource
from ..errors import ConfigInvalid


@dataclass(frozen=True)
class Instance:
    Q: BayesNet | ProductSpec
    P: BayesNet | ProductSpec
    order: tuple[int, ...] | None = None  # sample columns of P follow this relabelling
    gamma: float | None = None

    @property
    def n(self) -> int:
        return self.Q.n


def make_source(dist, rng, order=None) -> SampleSource:
    if isinstance(dist, ProductSpec):
        return ProductSource(dist, rng)
    if dist.structure.d == 0:
        return ProductSource(ProductSpec(np.array([t[0] for t in dist.cpt])), rng)
    src = NetSource(dist, rng)
    if order is not None:
        src = PermutedSource(src, np.argsort(order))
    return src


def _as_net(dist) -> BayesNet:
    return dist.as_net() if isinstance(dist, ProductSpec) else dist


def _as_product(dist) -> ProductSpec:
    if isinstance(dist, ProductSpec):
        return dist
    if dist.structure.d:
        raise ConfigInvalid("this tester needs a product reference")
    return ProductSpec(np.array([t[0] for t in dist.cpt]))


# --- families -------------------------------------------------------------------

def random_tree(n: int, lo: float, hi: float, seed: int) -> BayesNet:
    """Random recursive tree with cpt entries uniform in ``[lo, hi]``."""
    rng = np.random.default_rng(seed)
    parents = tuple(() if i == 0 else (int(rng.integers(0, i)),) for i in range(n))
    cpt = tuple(rng.uniform(lo, hi, size=1 << len(ps)) for ps in parents)
    return BayesNet(DagStructure(n, parents), cpt)


def shifted(net: BayesNet, shift: float, seed: int, lo: float = 0.02, hi: float = 0.98) -> BayesNet:
    """Move every cpt entry by ``+- shift`` (random signs), clipped to ``[lo, hi]``."""
    rng = np.random.default_rng(seed)
    return net.with_cpt([np.clip(t + shift * np.where(rng.integers(0, 2, t.size) == 1, 1, -1), lo, hi)
                         for t in net.cpt])


def v_structure_pair(strength: float = 0.3) -> tuple[BayesNet, BayesNet, tuple[int, ...]]:
    """Six nodes on the skeleton 0-1, 1-2, 2-3, 3-4, 4-5.

    The true net is the chain 0 -> 1 -> ... -> 5.  The wrong one makes 1 a
    collider (0 -> 1 <- 2); its topological relabelling is returned as ``order``.
    """
    hi, lo = 0.5 + strength, 0.5 - strength
    link = np.array([lo, hi])
    chain = BayesNet(DagStructure(6, ((), (0,), (1,), (2,), (3,), (4,))),
                     (np.array([0.5]),) + tuple(link for _ in range(5)))
    raw = {"n": 6, "parents": [[], [0, 2], [], [2], [3], [4]],
           "cpt": [{"node": 0, "assignment": "", "p": 0.5},
                   {"node": 2, "assignment": "", "p": 0.5},
                   {"node": 1, "assignment": "00", "p": 0.5 - strength},
                   {"node": 1, "assignment": "10", "p": 0.5},
                   {"node": 1, "assignment": "01", "p": 0.5},
                   {"node": 1, "assignment": "11", "p": 0.5 + strength},
                   {"node": 3, "assignment": "0", "p": lo}, {"node": 3, "assignment": "1", "p": hi},
                   {"node": 4, "assignment": "0", "p": lo}, {"node": 4, "assignment": "1", "p": hi},
                   {"node": 5, "assignment": "0", "p": lo}, {"node": 5, "assignment": "1", "p": hi}]}
    wrong = BayesNet.from_dict(raw)
    return chain, wrong, wrong.structure.order


def _fam_product_uniform(p, seed):
    q = ProductSpec(np.full(p["n"], 0.5))
    return Instance(q, q)


def _fam_uniformity_no(p, seed):
    return Instance(ProductSpec(np.full(p["n"], 0.5)),
                    instances.gen_product_uniformity_no(p["n"], p["eps"], seed))


def _fam_unbalanced(p, seed):
    null, alt = instances.gen_unbalanced_identity_pair(p["n"], p["eps"], seed)
    return Instance(null, null if p.get("null", False) else alt)


def _fam_closeness(p, seed):
    a, b = instances.gen_closeness_pair(p["n"], p.get("k", 2), p["eps"], seed, p.get("far", True))
    return Instance(b, a)


def _fam_tree_matching(p, seed):
    """Uniform reference vs a matching-orientation tree.  With ``structured`` the
    uniform reference is written on the tree's DAG, which is what a
    known-structure tester needs to see the pair correlations."""
    net, _ = instances.gen_tree_matching_net(p["n"], p["eps"], seed)
    u = BayesNet.product(np.full(p["n"], 0.5))
    if p.get("structured", False):
        u = net.with_cpt([np.full(t.size, 0.5) for t in net.cpt])
    return Instance(u, u if p.get("null", False) else net, gamma=p.get("gamma"))


def _fam_random_tree(p, seed):
    Q = random_tree(p["n"], p.get("lo", 0.3), p.get("hi", 0.7), seed)
    shift = p.get("shift", 0.0)
    P = shifted(Q, shift, seed + 1) if shift else Q
    return Instance(Q, P)


def _fam_v_structure(p, seed):
    chain, wrong, order = v_structure_pair(p.get("strength", 0.3))
    gamma = p.get("gamma") or min(0.99, nondegeneracy_interval(chain).gamma_lower)
    if p.get("wrong", False):
        return Instance(chain, wrong, order, gamma)
    return Instance(chain, chain, None, gamma)


def _fam_net_json(p, seed):
    Q = BayesNet.from_dict(p["net"])
    P = BayesNet.from_dict(p["alt"]) if p.get("alt") else Q
    return Instance(Q, P)


FAMILIES: dict[str, Callable[[dict, int], Instance]] = {
    "product_uniform": _fam_product_uniform,
    "product_uniformity_no": _fam_uniformity_no,
    "unbalanced_identity_pair": _fam_unbalanced,
    "closeness_pair": _fam_closeness,
    "tree_matching": _fam_tree_matching,
    "random_tree": _fam_random_tree,
    "v_structure": _fam_v_structure,
    "net_json": _fam_net_json,
}


def build_instance(family: str, params: dict, seed: int) -> Instance:
    try:
        builder = FAMILIES[family]
    except KeyError:
        raise ConfigInvalid(f"unknown family {family!r}") from None
    try:
        return builder(params, seed)
    except KeyError as exc:
        raise ConfigInvalid(f"family {family!r} is missing parameter {exc}") from None


# --- testers ----------------------------------------------------------------------

def _t_product_identity(inst, eps, rngs, p):
    src = make_source(inst.P, rngs[0])
    return product.product_identity_test(_as_product(inst.Q), src, eps, p.get("constant"),
                                         rngs[2], p.get("m"))


def _t_product_identity_pipeline(inst, eps, rngs, p):
    src = make_source(inst.P, rngs[0])
    return product.product_identity_pipeline(_as_product(inst.Q), src, eps, p.get("constant"), rngs[2])


def _t_product_closeness(inst, eps, rngs, p):
    sp, sq = make_source(inst.P, rngs[0]), make_source(inst.Q, rngs[1])
    C = p.get("constant", product.CLOSENESS_CALIBRATED_C)
    return product.product_closeness_test(sp, sq, eps, None, C, rngs[2], p.get("m"))


def _t_bn_identity_known(inst, eps, rngs, p):
    src = make_source(_as_net(inst.P), rngs[0], inst.order)
    return bn_testers.bn_identity_known_structure(_as_net(inst.Q), src, eps, p.get("alpha"),
                                                  m=p.get("m"))


def _t_bn_closeness_known(inst, eps, rngs, p):
    Q = _as_net(inst.Q)
    sp = make_source(_as_net(inst.P), rngs[0], inst.order)
    sq = make_source(Q, rngs[1])
    return bn_testers.bn_closeness_known_structure(Q.structure, sp, sq, eps, p.get("alpha"),
                                                   rngs[2], p.get("m"))


def _gamma(inst, p):
    g = p.get("gamma", inst.gamma)
    if g is None:
        raise ConfigInvalid("this tester needs 'gamma'")
    return g


def _t_bn_identity_unknown(inst, eps, rngs, p):
    src = make_source(_as_net(inst.P), rngs[0], inst.order)
    Q = _as_net(inst.Q)
    return bn_testers.bn_identity_unknown_structure(Q, src, eps, _gamma(inst, p), p.get("d"),
                                                    p.get("alpha"), structure_m=p.get("m"))


def _t_bn_closeness_unknown(inst, eps, rngs, p):
    Q = _as_net(inst.Q)
    sp = make_source(_as_net(inst.P), rngs[0], inst.order)
    sq = make_source(Q, rngs[1])
    d = p.get("d", Q.structure.d)
    return bn_testers.bn_closeness_unknown_structure(list(range(Q.n)), sp, sq, eps, _gamma(inst, p),
                                                     d, p.get("alpha"), rngs[2], p.get("m"))


def _t_structure(inst, eps, rngs, p):
    Q = _as_net(inst.Q)
    src = make_source(_as_net(inst.P), rngs[0], inst.order)
    return structure.structure_test(Q.structure, src, _gamma(inst, p), p.get("d"), p.get("m"))


def _t_tree_structure(inst, eps, rngs, p):
    src = make_source(_as_net(inst.P), rngs[0], inst.order)
    return structure.tree_structure_test(_as_net(inst.Q), src, p.get("c", 0.3), _gamma(inst, p),
                                         p.get("m"))


TESTERS: dict[str, Callable] = {
    "product_identity": _t_product_identity,
    "product_identity_pipeline": _t_product_identity_pipeline,
    "product_closeness": _t_product_closeness,
    "bn_identity_known": _t_bn_identity_known,
    "bn_closeness_known": _t_bn_closeness_known,
    "bn_identity_unknown": _t_bn_identity_unknown,
    "bn_closeness_unknown": _t_bn_closeness_unknown,
    "structure": _t_structure,
    "tree_structure": _t_tree_structure,
}


def get_tester(name: str) -> Callable:
    try:
        return TESTERS[name]
    except KeyError:
        raise ConfigInvalid(f"unknown tester {name!r}") from None
