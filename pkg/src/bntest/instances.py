"""Seeded generators for the adversarial instance families.

Every generator is a pure function of its parameters and seed.  Instances
can be wrapped in a JSON envelope ``{"family", "params", "seed", ...}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from math import sqrt
from typing import Sequence

import numpy as np

from .core.dag import DagStructure
from .core.net import BayesNet, ProductSpec
from .errors import ArityMismatch, InvalidParameter

EPS0 = 0.3
OUTSIDE = "outside-proof-regime"


def _regime(eps: float, eps0: float = EPS0) -> list[str]:
    return [OUTSIDE] if eps > eps0 else []


def _signs(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.where(rng.integers(0, 2, size=n) == 1, -1.0, 1.0)


def gen_product_uniformity_no(n: int, eps: float, seed: int) -> ProductSpec:
    """Means ``1/2 + s_i eps / sqrt(n)`` with independent random signs."""
    rng = np.random.default_rng(seed)
    return ProductSpec(0.5 + _signs(rng, n) * eps / sqrt(n))


def gen_unbalanced_identity_pair(n: int, eps: float, seed: int) -> tuple[ProductSpec, ProductSpec]:
    """Null ``Bern(1/n)^n`` and a perturbation with means ``(1 +- eps) / n``."""
    rng = np.random.default_rng(seed)
    null = ProductSpec(np.full(n, 1.0 / n))
    return null, ProductSpec((1.0 + _signs(rng, n) * eps) / n)


def gen_closeness_pair(n: int, k: int, eps: float, seed: int,
                       far: bool = True) -> tuple[ProductSpec, ProductSpec]:
    """Each coordinate is heavy (both means ``1/k``) or light with probability 1/2.

    Light coordinates carry ``1/n`` in both (``far=False``) or
    ``(1 +- eps)/n`` vs ``(1 -+ eps)/n`` (``far=True``).
    """
    if k < 1:
        raise InvalidParameter("k must be >= 1")
    rng = np.random.default_rng(seed)
    heavy = rng.integers(0, 2, size=n) == 1
    s = _signs(rng, n)
    if far:
        lp, lq = (1 + s * eps) / n, (1 - s * eps) / n
    else:
        lp = lq = np.full(n, 1.0 / n)
    p = np.where(heavy, 1.0 / k, lp)
    q = np.where(heavy, 1.0 / k, lq)
    return ProductSpec(p), ProductSpec(q)


# --- tree matching family -------------------------------------------------------

@dataclass(frozen=True)
class MatchingOrientation:
    pairs: tuple[tuple[int, int], ...]
    orientations: tuple[int, ...]

    def __post_init__(self):
        flat = sorted(v for p in self.pairs for v in p)
        n = len(flat)
        if n % 2 or flat != list(range(n)) or any(i >= j for i, j in self.pairs):
            raise InvalidParameter("pairs must partition range(n) into (i, j) with i < j")
        if len(self.orientations) != len(self.pairs):
            raise InvalidParameter("need one orientation bit per pair")

    @property
    def n(self) -> int:
        return 2 * len(self.pairs)

    def agreements(self, x: np.ndarray) -> np.ndarray:
        """``c(lambda, x)``: pairs whose bits agree (orientation 0) or differ (orientation 1)."""
        x = np.asarray(x)
        c = np.zeros(x.shape[:-1], dtype=np.int64)
        for (i, j), o in zip(self.pairs, self.orientations):
            c += (x[..., i] ^ x[..., j]) == o
        return c

    def to_dict(self) -> dict:
        return {"pairs": [list(p) for p in self.pairs], "orientations": list(self.orientations)}


def random_matching(n: int, rng: np.random.Generator) -> MatchingOrientation:
    perm = rng.permutation(n)
    pairs = sorted(tuple(sorted((int(perm[2 * k]), int(perm[2 * k + 1])))) for k in range(n // 2))
    orient = tuple(int(b) for b in rng.integers(0, 2, size=n // 2))
    return MatchingOrientation(tuple(pairs), orient)


def matching_net(lam: MatchingOrientation, delta: float) -> BayesNet:
    """Net with uniform marginals and, per pair, ``Pr[agree] = 1/2 + delta``."""
    n = lam.n
    parents: list[tuple[int, ...]] = [()] * n
    cpt: list[list[float]] = [[0.5] for _ in range(n)]
    for (i, j), o in zip(lam.pairs, lam.orientations):
        s = 1.0 if o == 0 else -1.0
        parents[j] = (i,)
        cpt[j] = [0.5 - s * delta, 0.5 + s * delta]
    return BayesNet(DagStructure(n, tuple(parents)), tuple(np.array(c) for c in cpt))


def matching_closed_form(lam: MatchingOrientation, delta: float) -> np.ndarray:
    """``P_lambda(x) = U(x) (1 + 2 delta)^c (1 - 2 delta)^(n/2 - c)`` for every ``x``."""
    n = lam.n
    x = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1)
    c = lam.agreements(x)
    return (1 + 2 * delta) ** c * (1 - 2 * delta) ** (n // 2 - c) / 2.0 ** n


def gen_tree_matching_net(n: int, eps: float, seed: int) -> tuple[BayesNet, MatchingOrientation]:
    if n % 2:
        raise InvalidParameter("n must be even")
    delta = eps / sqrt(n)
    if delta > 0.5:
        raise InvalidParameter("eps must be at most sqrt(n)/2")
    lam = random_matching(n, np.random.default_rng(seed))
    return matching_net(lam, delta), lam


# --- pointer mixture ----------------------------------------------------------

def gen_pointer_mixture(d: int, leaf_products: Sequence[ProductSpec]) -> BayesNet:
    """``d`` fair pointer coins selecting one of ``2^d`` products on the other nodes."""
    leaves = [p if isinstance(p, ProductSpec) else ProductSpec(np.asarray(p, float)) for p in leaf_products]
    if len(leaves) != 1 << d:
        raise ArityMismatch(f"need {1 << d} leaf products for d={d}, got {len(leaves)}")
    k = leaves[0].n
    if any(p.n != k for p in leaves):
        raise ArityMismatch("leaf products must share a dimension")
    n = d + k
    pointers = tuple(range(d))
    parents = [()] * d + [pointers] * k
    cpt = [np.array([0.5]) for _ in range(d)]
    # configuration code a has bit t = pointer t, matching the leaf index a
    cpt += [np.array([leaves[a].means[r] for a in range(1 << d)]) for r in range(k)]
    return BayesNet(DagStructure(n, tuple(parents)), tuple(cpt))


# --- JSON envelope ------------------------------------------------------------

FAMILIES = ("product_uniformity_no", "unbalanced_identity_pair", "closeness_pair",
            "tree_matching_net", "pointer_mixture")


def generate(family: str, params: dict, seed: int) -> dict:
    """Build an instance and wrap it in the JSON envelope."""
    p = dict(params)
    tags: list[str] = []
    if family == "product_uniformity_no":
        body = {"product": gen_product_uniformity_no(p["n"], p["eps"], seed).to_dict()}
        tags = _regime(p["eps"])
    elif family == "unbalanced_identity_pair":
        null, alt = gen_unbalanced_identity_pair(p["n"], p["eps"], seed)
        body = {"null": null.to_dict(), "alt": alt.to_dict()}
        tags = _regime(p["eps"])
    elif family == "closeness_pair":
        a, b = gen_closeness_pair(p["n"], p["k"], p["eps"], seed, p.get("far", True))
        body = {"p": a.to_dict(), "q": b.to_dict()}
        tags = _regime(p["eps"])
    elif family == "tree_matching_net":
        net, lam = gen_tree_matching_net(p["n"], p["eps"], seed)
        body = {"net": net.to_dict(), "matching": lam.to_dict()}
    elif family == "pointer_mixture":
        leaves = [ProductSpec(np.asarray(m, float)) for m in p["leaves"]]
        body = {"net": gen_pointer_mixture(p["d"], leaves).to_dict()}
    else:
        raise InvalidParameter(f"unknown family {family!r}")
    return {"family": family, "params": p, "seed": seed, "tags": tags, **body}


def to_json(envelope: dict) -> str:
    return json.dumps(envelope, sort_keys=True)


def from_json(text: str) -> dict:
    """Parse an envelope and rebuild its distribution objects."""
    obj = json.loads(text)
    out = dict(obj)
    for key in ("product", "null", "alt", "p", "q"):
        if key in obj:
            out[key] = ProductSpec.from_dict(obj[key])
    if "net" in obj:
        out["net"] = BayesNet.from_dict(obj["net"])
    return out
