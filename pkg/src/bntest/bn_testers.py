"""Identity and closeness testers for Bayes nets, with known or unknown structure."""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, log, sqrt
from typing import Sequence

import numpy as np

from .core.dag import DagStructure
from .core.inference import balancedness, config_probabilities
from .core.net import BayesNet
from .core.sampling import PermutedSource, SampleSource, as_rng, draw_counts, source_for
from .core.tables import rows_to_codes
from .errors import BalancednessViolation, EnumerationCapExceeded, InvalidParameter
from .product import ACCEPT, REJECT, Verdict, _check_eps, check_m, decide, forced_reject
from .structure import recover_skeleton, structure_sample_size, structure_test

IDENTITY_ALPHA = 64.0
# Closeness needs tau*m = eps^2 m / 288 to clear a few null standard deviations
# (sqrt(n 2^(d+1))); 2048 * 2^(d/2) sqrt(n) / 288 >= 5 sqrt(2 n 2^d) holds for every n, d.
CLOSENESS_ALPHA = 2048.0
BALANCE_BETA = 16.0
TRIPLE_CAP = 10**8


@dataclass
class ConfigCounter:
    """Per-(node, configuration) bookkeeping over a stream of samples.

    ``seen`` counts matching samples so far; ``ones`` counts ``X_i = 1``
    among the first ``target`` of them.
    """
    parents: tuple[tuple[int, ...], ...]
    target: list[np.ndarray]
    seen: list[np.ndarray]
    ones: list[np.ndarray]

    @classmethod
    def start(cls, structure: DagStructure, target: Sequence[np.ndarray]) -> "ConfigCounter":
        target = [np.asarray(t, dtype=np.int64) for t in target]
        return cls(structure.parents, target, [np.zeros_like(t) for t in target],
                   [np.zeros_like(t) for t in target])

    def update(self, bits: np.ndarray) -> None:
        for i, ps in enumerate(self.parents):
            codes = rows_to_codes(bits, ps) if ps else np.zeros(bits.shape[0], dtype=np.int64)
            col = bits[:, i]
            for a in range(self.target[i].size):
                pos = np.flatnonzero(codes == a)
                need = max(int(self.target[i][a] - min(self.seen[i][a], self.target[i][a])), 0)
                self.ones[i][a] += int(col[pos[:need]].sum())
                self.seen[i][a] += pos.size

    @property
    def complete(self) -> bool:
        return all(np.all(s >= t) for s, t in zip(self.seen, self.target))

    def zeros(self) -> list[np.ndarray]:
        return [np.minimum(s, t) - o for s, t, o in zip(self.seen, self.target, self.ones)]


# --- known structure identity ------------------------------------------------

def identity_sample_size_bn(n: int, d: int, eps: float, alpha: float = IDENTITY_ALPHA) -> int:
    return int(ceil(alpha * 2 ** (d / 2) * sqrt(n) / eps ** 2))


def config_targets(Q: BayesNet, m: int) -> list[np.ndarray]:
    """``N_{i,a} = floor(m Pr_Q[Pi_{i,a}] / sqrt 2)``."""
    return [np.floor(m * pr / sqrt(2)).astype(np.int64) for pr in config_probabilities(Q)]


def config_statistic(Z, Y, N, q):
    """Unbiased per-configuration estimate of ``(p - q)^2``; 0 when ``N <= 1``."""
    Z, Y, N, q = (np.asarray(v, dtype=np.float64) for v in (Z, Y, N, q))
    num = ((1 - q) * Z - q * Y) ** 2 + (2 * q - 1) * Z - q ** 2 * (Z + Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(N > 1, num / (N * (N - 1)), 0.0)


def _flip_configs(Q: BayesNet):
    flips = [t > 0.5 for t in Q.cpt]
    qf = [np.where(f, 1.0 - t, t) for f, t in zip(flips, Q.cpt)]
    return flips, qf


def identity_statistic_bn(Q: BayesNet, counter: ConfigCounter) -> float:
    """``sum Pr_Q[Pi] W_{i,a} / (q (1 - q))`` after the per-configuration flip."""
    flips, qf = _flip_configs(Q)
    probs = config_probabilities(Q)
    total = 0.0
    for pr, f, q, z, y, N in zip(probs, flips, qf, counter.ones, counter.zeros(), counter.target):
        Z, Y = np.where(f, y, z), np.where(f, z, y)
        w = config_statistic(Z, Y, N, q)
        with np.errstate(divide="ignore", invalid="ignore"):
            total += float(np.sum(np.where(q > 0, pr * w / (q * (1 - q)), 0.0)))
    return total


def check_balance(Q: BayesNet, m: int, beta: float = BALANCE_BETA) -> None:
    rep = balancedness(Q)
    n, d = Q.n, Q.structure.d
    need_c = beta * log(n) / m if n > 1 else 0.0
    need_C = beta * (d + log(n)) / m
    if rep.c < need_c or rep.C < need_C:
        raise BalancednessViolation(
            f"Q is ({rep.c:.4g}, {rep.C:.4g})-balanced; need c >= {need_c:.4g}, C >= {need_C:.4g}")


def bn_identity_known_structure(Q: BayesNet, source, eps: float, alpha_override: float | None = None,
                                rng=None, beta: float = BALANCE_BETA, m: int | None = None) -> Verdict:
    """Identity test against an explicit balanced net, sampling from a net with the same DAG."""
    _check_eps(eps)
    src = source_for(source, rng)
    n, d = Q.n, Q.structure.d
    check_m(m)
    if m is None:
        m = identity_sample_size_bn(n, d, eps, alpha_override or IDENTITY_ALPHA)
    check_balance(Q, m, beta)
    threshold = eps ** 2 / 32.0
    counter = ConfigCounter.start(Q.structure, config_targets(Q, m))
    counter.update(src.draw(m).bits)
    for seen, N in zip(counter.seen, counter.target):
        if np.any(seen < N):
            return forced_reject("undersampled-config", np.inf, threshold, m, stage="statistic")
        if np.any(seen > 2 * N):
            return forced_reject("oversampled-config", np.inf, threshold, m, stage="statistic")
    return decide(identity_statistic_bn(Q, counter), threshold, m, stage="statistic", m=m)


def thought_experiment_statistic(Q: BayesNet, source, m: int, rng=None,
                                 chunk: int | None = None) -> float:
    """The identity statistic with every configuration read to its target.

    Keeps sampling until each configuration has ``N_{i,a}`` matches instead of
    rejecting; this is the quantity whose expectation the analysis computes.
    """
    src = source_for(source, rng)
    counter = ConfigCounter.start(Q.structure, config_targets(Q, m))
    chunk = chunk or m
    while not counter.complete:
        counter.update(src.draw(chunk).bits)
    return identity_statistic_bn(Q, counter)


# --- known structure closeness -----------------------------------------------

def closeness_sample_size_bn(n: int, d: int, eps: float, alpha: float = CLOSENESS_ALPHA) -> int:
    return int(ceil(alpha * 2 ** (d / 2) * sqrt(n) / eps ** 2))


def closeness_statistic(U, V) -> float:
    """``sum ((U - V)^2 - (U + V)) / (U + V)``, empty summands 0."""
    U = np.asarray(U, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    s = U + V
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.sum(np.where(s > 0, ((U - V) ** 2 - s) / s, 0.0)))


def stage1_min_observations(n: int, d: int) -> int:
    return int(ceil(48 * (d + log(n) + log(20))))


def _config_counts(bits: np.ndarray, structure: DagStructure):
    seen, ones = [], []
    for i, ps in enumerate(structure.parents):
        codes = rows_to_codes(bits, ps) if ps else np.zeros(bits.shape[0], dtype=np.int64)
        k = 1 << len(ps)
        seen.append(np.bincount(codes, minlength=k))
        ones.append(np.bincount(codes, weights=bits[:, i], minlength=k).astype(np.int64))
    return seen, ones


def _collect(src: SampleSource, counter: ConfigCounter, chunk: int, budget: int) -> int:
    drawn = 0
    while not counter.complete:
        k = min(chunk, budget - drawn + 1)
        if k <= 0:
            break
        counter.update(src.draw(k).bits)
        drawn += k
    return drawn


def bn_closeness_known_structure(S: DagStructure, source_p, source_q, eps: float,
                                 alpha_override: float | None = None, rng=None,
                                 m: int | None = None) -> Verdict:
    """Two-sample closeness test for nets sharing the DAG ``S``."""
    _check_eps(eps)
    sp = source_for(source_p, rng)
    sq = source_for(source_q, rng)
    rng = as_rng(rng) if rng is not None else sp.rng
    n, d = S.n, S.d
    check_m(m)
    if m is None:
        m = closeness_sample_size_bn(n, d, eps, alpha_override or CLOSENESS_ALPHA)
    tau = eps ** 2 / 288.0
    threshold = tau * m

    # stage 1: configuration counts and orientation
    bp, bq = sp.draw(m).bits, sq.draw(m).bits
    n_hat, ones_p = _config_counts(bp, S)
    m_hat, ones_q = _config_counts(bq, S)
    used = 2 * m
    for a, b in zip(n_hat, m_hat):
        if np.any(np.maximum(a, b) > 4 * np.minimum(a, b)):
            return forced_reject("config-count-mismatch", np.inf, threshold, used, stage="preprocess")
    k_min = stage1_min_observations(n, d)
    flips = []
    for a, b, oa, ob in zip(n_hat, m_hat, ones_p, ones_q):
        obs = a + b
        with np.errstate(divide="ignore", invalid="ignore"):
            est = np.where(obs > 0, (oa + ob) / obs, 0.0)
        flips.append((obs >= k_min) & (est > 0.5))

    # stage 2: Poissonized per-configuration counts from fresh samples; each source
    # gets its own Poisson(N_hat) target so that U and V are independent Poissons
    tp = [rng.poisson(a) for a in n_hat]
    tq = [rng.poisson(a) for a in n_hat]
    cp = ConfigCounter.start(S, tp)
    cq = ConfigCounter.start(S, tq)
    budget = 10 * m
    drawn = _collect(sp, cp, m, budget)
    drawn += _collect(sq, cq, m, budget - drawn)
    used += drawn
    if drawn > budget or not (cp.complete and cq.complete):
        return forced_reject("sample-cap", np.inf, threshold, used, stage="statistic")
    U = np.concatenate([np.where(f, t - o, o) for f, t, o in zip(flips, tp, cp.ones)])
    V = np.concatenate([np.where(f, t - o, o) for f, t, o in zip(flips, tq, cq.ones)])
    return decide(closeness_statistic(U, V), threshold, used, stage="statistic", m=m)


# --- unknown structure --------------------------------------------------------

def bn_identity_unknown_structure(Q: BayesNet, source, eps: float, gamma: float,
                                  d: int | None = None, alpha_override: float | None = None,
                                  rng=None, structure_m: int | None = None) -> Verdict:
    """Structure test on ``Q``'s DAG, then the known-structure identity test."""
    if not gamma or gamma <= 0 or gamma >= 1:
        raise InvalidParameter("gamma must lie in (0, 1)")
    src = source_for(source, rng)
    v1 = structure_test(Q.structure, src, gamma, d, m=structure_m)
    if not v1.accepted:
        return v1
    v2 = bn_identity_known_structure(Q, src, eps, alpha_override)
    return Verdict(v2.decision, v2.statistic, v2.threshold, v1.samples_used + v2.samples_used,
                   v2.trigger, v2.stage, v2.details)


def orient(edges, ordering: Sequence[int], n: int) -> DagStructure:
    """DAG on relabelled nodes ``k -> ordering[k]``, edges pointing forward in the order."""
    rank = {v: k for k, v in enumerate(ordering)}
    parents = [[] for _ in range(n)]
    for a, b in edges:
        ra, rb = rank[a], rank[b]
        lo, hi = min(ra, rb), max(ra, rb)
        parents[hi].append(lo)
    return DagStructure(n, tuple(tuple(sorted(p)) for p in parents))


def bn_closeness_unknown_structure(ordering: Sequence[int], source_p, source_q, eps: float,
                                   gamma: float, d: int, alpha_override: float | None = None,
                                   rng=None, skeleton_m: int | None = None) -> Verdict:
    """Recover both skeletons by conditional-independence tests; if they agree,
    orient along ``ordering`` and run the known-structure closeness test."""
    if not 0 < gamma < 1:
        raise InvalidParameter("gamma must lie in (0, 1)")
    sp = source_for(source_p, rng)
    sq = source_for(source_q, rng)
    n = sp.n
    if d >= n or float(n) ** (d + 2) > TRIPLE_CAP:
        raise EnumerationCapExceeded(f"d={d} with n={n} exceeds the triple enumeration cap")
    ordering = list(ordering)
    if sorted(ordering) != list(range(n)):
        raise InvalidParameter("ordering must be a permutation of range(n)")
    m_ci = structure_sample_size(n, d, gamma) if skeleton_m is None else skeleton_m
    edges_p = recover_skeleton(draw_counts(sp, m_ci), n, d, gamma)
    edges_q = recover_skeleton(draw_counts(sq, m_ci), n, d, gamma)
    used = 2 * m_ci
    if edges_p != edges_q:
        return Verdict(REJECT, float(len(set(edges_p) ^ set(edges_q))), 0.0, used,
                       "skeleton-mismatch", "structure",
                       {"edges_p": edges_p, "edges_q": edges_q})
    S = orient(edges_p, ordering, n)
    if ordering != list(range(n)):
        sp, sq = PermutedSource(sp, ordering), PermutedSource(sq, ordering)
    v = bn_closeness_known_structure(S, sp, sq, eps, alpha_override)
    details = dict(v.details, edges=edges_p)
    return Verdict(v.decision, v.statistic, v.threshold, used + v.samples_used, v.trigger,
                   v.stage, details)


__all__ = [
    "ACCEPT", "REJECT", "ConfigCounter", "bn_closeness_known_structure",
    "bn_closeness_unknown_structure", "bn_identity_known_structure",
    "bn_identity_unknown_structure", "closeness_statistic", "config_statistic",
    "identity_statistic_bn", "thought_experiment_statistic",
]
