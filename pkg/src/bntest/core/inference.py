"""Exact inference by enumeration, plus a Monte-Carlo fallback beyond the cap."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dag import ParentalConfiguration, assignment_to_code
from .net import BayesNet, _joint
from .tables import DEFAULT_ENUMERATION_CAP, marginal

MC_DRAWS = 10**6


def exact_joint(P: BayesNet, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Probability of every ``x in {0,1}^n`` (index convention of ``core.tables``)."""
    if cap == DEFAULT_ENUMERATION_CAP:
        return P.joint
    return _joint(P, cap)


def config_probabilities(P: BayesNet, cap: int = DEFAULT_ENUMERATION_CAP) -> list[np.ndarray]:
    """``out[i][code] = Pr_P[Pi_{i,a}]`` for every node, exact by enumeration."""
    joint = exact_joint(P, cap)
    return [marginal(joint, P.n, ps) for ps in P.parents]


def estimate_config_probabilities(P: BayesNet, draws: int = MC_DRAWS, rng=None):
    """Monte-Carlo estimate of every configuration probability.

    Returns ``(estimates, halfwidths)`` with 3-sigma binomial half-widths.
    """
    from .sampling import sample  # local import: sampling depends on this module

    batch = sample(P, draws, rng)
    est, hw = [], []
    for ps in P.parents:
        counts = batch.counts(ps)
        p = counts / max(draws, 1)
        est.append(p)
        hw.append(3.0 * np.sqrt(p * (1 - p) / max(draws, 1)))
    return est, hw


def parent_config_prob(P: BayesNet, k: ParentalConfiguration | tuple,
                       cap: int = DEFAULT_ENUMERATION_CAP, rng=None,
                       draws: int = MC_DRAWS) -> tuple[float, float]:
    """``(Pr_P[Pi_k], halfwidth)``; halfwidth is 0 when computed exactly."""
    node, assignment = k
    ps = P.parents[node]
    if len(assignment) != len(ps):
        raise ValueError("assignment length must equal the parent count")
    code = assignment_to_code(assignment)
    if P.n <= cap:
        return float(marginal(exact_joint(P, cap), P.n, ps)[code]), 0.0
    est, hw = estimate_config_probabilities(P, draws, rng)
    return float(est[node][code]), float(hw[node][code])


@dataclass(frozen=True)
class BalancednessReport:
    c: float
    C: float
    config_probs: tuple[np.ndarray, ...]
    exact: bool = True

    def is_balanced(self, c: float, C: float) -> bool:
        return self.c >= c and self.C >= C


def balancedness(P: BayesNet, cap: int = DEFAULT_ENUMERATION_CAP, rng=None,
                 draws: int = MC_DRAWS) -> BalancednessReport:
    """Largest ``(c, C)`` such that ``P`` is (c, C)-balanced."""
    v = P.cpt_vector()
    c = float(np.min(np.minimum(v, 1 - v))) if v.size else 0.5
    if P.n <= cap:
        probs = config_probabilities(P, cap)
        exact = True
    else:
        probs, _ = estimate_config_probabilities(P, draws, rng)
        exact = False
    C = float(min(pr.min() for pr in probs)) if probs else 1.0
    return BalancednessReport(c, C, tuple(probs), exact)
