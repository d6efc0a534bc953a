"""Distances between distributions on {0,1}^n and the CPT-level bounds on them.

All L1 quantities are the plain norm ``||P - Q||_1 = 2 d_TV(P, Q)``.  KL is in
nats.  Hellinger follows ``H(P,Q)^2 = 1/2 sum (sqrt P - sqrt Q)^2``.
"""
from __future__ import annotations

import numpy as np

from ..errors import BoundaryProbability, StructureMismatch
from .inference import config_probabilities
from .net import BayesNet, ProductSpec
from .tables import DEFAULT_ENUMERATION_CAP, check_cap

PRODUCT_L1_FLOOR = 4.0 * (1.0 - np.exp(-1.5))


def _joint_of(dist, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    if isinstance(dist, (BayesNet, ProductSpec)):
        check_cap(dist.n, cap)
        return dist.joint
    return np.asarray(dist, dtype=np.float64)


def l1_exact(P, Q, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    return float(np.abs(_joint_of(P, cap) - _joint_of(Q, cap)).sum())


def tv_exact(P, Q, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    return 0.5 * l1_exact(P, Q, cap)


def hellinger_sq_exact(P, Q, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    a, b = _joint_of(P, cap), _joint_of(Q, cap)
    return float(0.5 * ((np.sqrt(a) - np.sqrt(b)) ** 2).sum())


def kl_exact(P, Q, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Brute-force ``sum_x P(x) ln(P(x)/Q(x))``."""
    a, b = _joint_of(P, cap), _joint_of(Q, cap)
    s = a > 0
    if np.any(b[s] == 0):
        return float("inf")
    return float(np.sum(a[s] * np.log(a[s] / b[s])))


def bernoulli_kl(p, q):
    """Elementwise KL(Bern(p) || Bern(q)) in nats, with 0 ln 0 = 0."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(p > 0, p * np.log(p / q), 0.0)
        t0 = np.where(p < 1, (1 - p) * np.log((1 - p) / (1 - q)), 0.0)
    return t1 + t0


def _check_same(P: BayesNet, Q: BayesNet) -> None:
    if not P.same_structure(Q):
        raise StructureMismatch("the two nets do not share a DAG")


def _check_interior(Q: BayesNet) -> None:
    v = Q.cpt_vector()
    if np.any(v <= 0) or np.any(v >= 1):
        raise BoundaryProbability("cpt entries must lie strictly inside (0, 1)")


def kl_same_structure(P: BayesNet, Q: BayesNet) -> float:
    """KL(P || Q) from the CPTs: sum over (i,a) of Pr_P[Pi_{i,a}] KL(p_{i,a} || q_{i,a})."""
    _check_same(P, Q)
    _check_interior(Q)
    w = config_probabilities(P)
    return float(sum(np.dot(wi, bernoulli_kl(p, q)) for wi, p, q in zip(w, P.cpt, Q.cpt)))


def chi2_identity_proxy(P: BayesNet, Q: BayesNet, weights: str = "P") -> float:
    """``sum Pr[Pi_k] (p_k - q_k)^2 / (q_k (1 - q_k))``.

    ``weights="P"`` gives the KL upper bound; ``weights="Q"`` is the expectation
    of the known-structure identity statistic.
    """
    _check_same(P, Q)
    _check_interior(Q)
    if weights not in ("P", "Q"):
        raise ValueError("weights must be 'P' or 'Q'")
    w = config_probabilities(P if weights == "P" else Q)
    return float(sum(np.dot(wi, (p - q) ** 2 / (q * (1 - q))) for wi, p, q in zip(w, P.cpt, Q.cpt)))


def kl_lower_proxy(P: BayesNet, Q: BayesNet) -> float:
    """``2 sum Pr_P[Pi_k] (p_k - q_k)^2``, the lower side of the KL sandwich."""
    _check_same(P, Q)
    w = config_probabilities(P)
    return float(2 * sum(np.dot(wi, (p - q) ** 2) for wi, p, q in zip(w, P.cpt, Q.cpt)))


def hellinger_bound_bn(P: BayesNet, Q: BayesNet) -> float:
    """Upper bound on ``H(P,Q)^2`` from the CPTs of two same-structure nets."""
    _check_same(P, Q)
    wp, wq = config_probabilities(P), config_probabilities(Q)
    total = 0.0
    for a, b, p, q in zip(wp, wq, P.cpt, Q.cpt):
        den = (p + q) * (2 - p - q)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(den > 0, (p - q) ** 2 / den, 0.0)
        total += float(np.dot(np.sqrt(a * b), term))
    return 2.0 * total


def product_l1_lower_bound(p, q, c: float = PRODUCT_L1_FLOOR) -> float:
    """``min(c, ||p - q||_2^4)``, a lower bound on ``||P - Q||_1^2`` for products."""
    diff = np.asarray(p, float) - np.asarray(q, float)
    return float(min(c, np.sum(diff ** 2) ** 2))
