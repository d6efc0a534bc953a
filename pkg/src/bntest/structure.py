"""Conditional-independence testing, structure testing and tree recovery."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import ceil, comb, log, log2
from typing import Sequence

import numpy as np

from .core.dag import DagStructure
from .core.net import BayesNet
from .core.nondegeneracy import beta_from_table, nondegeneracy_conditions
from .core.sampling import CountTable, SampleBatch, as_rng, draw_counts, source_for
from .core.tables import marginal
from .errors import InfeasibleMoments, InvalidParameter
from .product import ACCEPT, REJECT, Verdict, check_m

CI_CONSTANT = 200.0
STRUCTURE_ERROR = 0.01
TREE_FAILURE = 0.1
_FEAS_TOL = 1e-12


# --- mutual information from moments ----------------------------------------

def _plogq(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        # q = 0 forces p = 0 up to float noise on the feasible region
        ok = (p > 0) & (q > 0)
        return np.where(ok, p * np.log2(np.where(ok, p, 1.0) / np.where(ok, q, 1.0)), 0.0)


def mi_from_moments(x, y, z):
    """Mutual information (bits) of two bits with means ``x, y`` and ``E[XY] = z``."""
    x, y, z = (np.asarray(v, dtype=np.float64) for v in (x, y, z))
    bad = ((z < -_FEAS_TOL) | (z > np.minimum(x, y) + _FEAS_TOL)
           | (1 + z - x - y < -_FEAS_TOL) | (x < -_FEAS_TOL) | (x > 1 + _FEAS_TOL)
           | (y < -_FEAS_TOL) | (y > 1 + _FEAS_TOL))
    if np.any(bad):
        raise InfeasibleMoments(f"moments outside the feasible region: x={x}, y={y}, z={z}")
    p11 = np.clip(z, 0, None)
    p10 = np.clip(x - z, 0, None)
    p01 = np.clip(y - z, 0, None)
    p00 = np.clip(1 - x - y + z, 0, None)
    out = (_plogq(p11, x * y) + _plogq(p10, x * (1 - y))
           + _plogq(p01, (1 - x) * y) + _plogq(p00, (1 - x) * (1 - y)))
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def mi_from_joint(p00: float, p10: float, p01: float, p11: float) -> float:
    """Mutual information (bits) of a 2x2 joint, cells indexed ``p{x}{y}``."""
    x, y = p10 + p11, p01 + p11
    cells = [(p00, (1 - x) * (1 - y)), (p10, x * (1 - y)), (p01, (1 - x) * y), (p11, x * y)]
    return float(sum(_plogq(p, q) for p, q in cells))


# --- moments ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MomentTable:
    """First and second moments of a distribution on ``{0,1}^n``.

    ``rho[i, j] = E[X_i X_j]`` with ``rho[i, i] = mu[i]``; ``tau`` is the
    additive accuracy the moments are trusted to (0 for exact moments).
    """
    mu: np.ndarray
    rho: np.ndarray
    tau: float = 0.0

    @property
    def n(self) -> int:
        return self.mu.size

    def check(self) -> bool:
        lim = np.minimum(self.mu[:, None], self.mu[None, :]) + 2 * self.tau + _FEAS_TOL
        return bool(np.all(self.rho >= -_FEAS_TOL) and np.all(self.rho <= lim))

    def mi_matrix(self) -> np.ndarray:
        mu = self.mu
        x = np.broadcast_to(mu[:, None], self.rho.shape)
        y = np.broadcast_to(mu[None, :], self.rho.shape)
        # clip sampled moments into the feasible region before evaluating
        z = np.clip(self.rho, np.maximum(0.0, x + y - 1), np.minimum(x, y))
        out = np.asarray(mi_from_moments(x, y, z), dtype=float)
        np.fill_diagonal(out, 0.0)
        return out

    @classmethod
    def from_counts(cls, counts, tau: float = 0.0) -> "MomentTable":
        """From a :class:`CountTable` or :class:`SampleBatch`."""
        if isinstance(counts, SampleBatch):
            bits = counts.bits.astype(np.float64)
            m = max(counts.m, 1)
            rho = bits.T @ bits / m
            return cls(np.diag(rho).copy(), rho, tau)
        hist = counts.hist.astype(np.float64)
        return cls.from_joint(hist / max(hist.sum(), 1.0), counts.n, tau)

    @classmethod
    def from_joint(cls, joint: np.ndarray, n: int, tau: float = 0.0) -> "MomentTable":
        rho = np.zeros((n, n))
        for i in range(n):
            rho[i, i] = marginal(joint, n, [i])[1]
            for j in range(i + 1, n):
                rho[i, j] = rho[j, i] = marginal(joint, n, [i, j])[3]
        return cls(np.diag(rho).copy(), rho, tau)

    @classmethod
    def from_net(cls, P: BayesNet) -> "MomentTable":
        return cls.from_joint(P.joint, P.n)


def exact_mutual_information(P: BayesNet, i: int, j: int) -> float:
    t = marginal(P.joint, P.n, [i, j])
    return mi_from_joint(t[0], t[1], t[2], t[3])


# --- Chow-Liu -----------------------------------------------------------------

def maximum_spanning_tree(weights: np.ndarray) -> list[tuple[int, int]]:
    """Kruskal on ``-w`` with ties broken by the lexicographic order of ``(i, j)``."""
    n = weights.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    edges = sorted(combinations(range(n), 2), key=lambda e: (-weights[e[0], e[1]], e))
    tree = []
    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.append((i, j))
            if len(tree) == n - 1:
                break
    return sorted(tree)


def chow_liu(moments: MomentTable | BayesNet | np.ndarray) -> list[tuple[int, int]]:
    """Maximum-MI spanning tree.  Accepts moments, an explicit net, or an MI matrix."""
    if isinstance(moments, BayesNet):
        moments = MomentTable.from_net(moments)
    weights = moments.mi_matrix() if isinstance(moments, MomentTable) else np.asarray(moments, float)
    # MI values agreeing to 1e-12 are ties (float noise must not override the tie-break)
    weights = np.round(weights, 12)
    if weights.shape[0] < 2:
        raise InvalidParameter("chow_liu needs n >= 2")
    return maximum_spanning_tree(weights)


def skeleton_edges(structure: DagStructure) -> list[tuple[int, int]]:
    return sorted((min(a, b), max(a, b)) for a, b in structure.edges())


# --- conditional independence ---------------------------------------------

def conditional_covariance_stat(counts, i: int, j: int, S: Sequence[int] = ()) -> float:
    """Plug-in ``E_a |Cov[X_i, X_j | X_S = a]|`` from a batch or a count table."""
    S = list(S)
    if i == j or i in S or j in S:
        raise InvalidParameter("need i != j and i, j not in S")
    return beta_from_table(counts.counts([i, j, *S]), len(S))


def ci_sample_size(d: int, gamma: float, fail_prob: float, constant: float = CI_CONSTANT) -> int:
    return int(ceil(constant * ((1 << d) + log(1.0 / fail_prob)) / gamma ** 2))


def _ci_verdict(beta_hat: float, gamma: float, m: int, **details) -> Verdict:
    # closed comparison: accept iff beta_hat <= gamma / 3
    decision = ACCEPT if beta_hat <= gamma / 3.0 else REJECT
    return Verdict(decision, float(beta_hat), gamma / 3.0, int(m), None, "statistic", details)


def conditional_independence_test(source, i: int, j: int, S: Sequence[int], gamma: float,
                                  fail_prob: float = 0.01, m: int | None = None,
                                  constant: float = CI_CONSTANT, rng=None) -> Verdict:
    """Accept iff the empirical conditional-covariance average is at most ``gamma / 3``."""
    if not 0 < gamma < 1:
        raise InvalidParameter("gamma must lie in (0, 1)")
    src = source_for(source, rng)
    S = list(S)
    check_m(m)
    m = ci_sample_size(len(S), gamma, fail_prob, constant) if m is None else m
    counts = draw_counts(src, m)
    return _ci_verdict(conditional_covariance_stat(counts, i, j, S), gamma, m)


# --- degree-d structure test -----------------------------------------------

def structure_sample_size(n: int, d: int, gamma: float, constant: float = CI_CONSTANT) -> int:
    return ci_sample_size(d, gamma, per_test_failure(n, d), constant)


def per_test_failure(n: int, d: int) -> float:
    return float(n) ** (-(d + 2)) / 100.0


def structure_test(S: DagStructure, source, gamma: float, d: int | None = None,
                   m: int | None = None, constant: float = CI_CONSTANT, rng=None) -> Verdict:
    """Reject iff some dependence that ``S`` implies looks conditionally independent.

    One shared batch serves every conditional-independence test.
    """
    if not 0 < gamma < 1:
        raise InvalidParameter("gamma must lie in (0, 1)")
    d = S.d if d is None else d
    triples = nondegeneracy_conditions(S, d)
    src = source_for(source, rng)
    check_m(m)
    m = structure_sample_size(S.n, d, gamma, constant) if m is None else m
    if not triples:
        return Verdict(ACCEPT, float("inf"), gamma / 3.0, 0, None, "structure", {"triples": 0})
    counts = draw_counts(src, m)
    betas = [conditional_covariance_stat(counts, t.i, t.j, t.S) for t in triples]
    k = int(np.argmin(betas))
    worst = triples[k]
    details = {"triples": len(triples), "weakest": [worst.i, worst.j, list(worst.S)]}
    if betas[k] <= gamma / 3.0:
        return Verdict(REJECT, betas[k], gamma / 3.0, m, "ci-accept", "structure", details)
    return Verdict(ACCEPT, betas[k], gamma / 3.0, m, None, "structure", details)


def recover_skeleton(counts, n: int, d: int, gamma: float) -> list[tuple[int, int]]:
    """Edges ``{i, j}`` whose dependence survives conditioning on every ``|S| <= d``."""
    edges = []
    for i, j in combinations(range(n), 2):
        rest = [v for v in range(n) if v not in (i, j)]
        dependent = True
        for size in range(min(d, len(rest)) + 1):
            for S in combinations(rest, size):
                if conditional_covariance_stat(counts, i, j, S) <= gamma / 3.0:
                    dependent = False
                    break
            if not dependent:
                break
        if dependent:
            edges.append((i, j))
    return edges


def skeleton_test_budget(n: int, d: int) -> int:
    return comb(n, 2) * sum(comb(max(n - 2, 0), s) for s in range(min(d, max(n - 2, 0)) + 1))


# --- tree structure test ------------------------------------------------------

@dataclass(frozen=True)
class TreeTestParameters:
    c: float
    gamma: float
    kappa: float
    c_prime: float
    lam: float
    tau: float

    @classmethod
    def compute(cls, c: float, gamma: float) -> "TreeTestParameters":
        if not 0 < c < 0.5 or not 0 < gamma < 1:
            raise InvalidParameter("need c in (0, 1/2) and gamma in (0, 1)")
        kappa = c * gamma ** 2 / (2 * log(2))
        c_prime = c / 2
        lam = 16 * log2(2 / c)
        tau = (kappa - (1 - 2 * c_prime ** 2) * kappa) / (4 * lam)
        return cls(c, gamma, kappa, c_prime, lam, tau)


def tree_sample_size(n: int, tau: float, fail: float = TREE_FAILURE) -> int:
    """Hoeffding + union bound over the ``n + n(n-1)/2`` moments."""
    k = n + n * (n - 1) // 2
    return int(ceil(log(2 * k / fail) / (2 * tau ** 2)))


def conditional_marginals(counts, n: int) -> np.ndarray:
    """``out[i, j, a] = Pr[X_i = 1 | X_j = a]`` (NaN when ``X_j = a`` never occurs)."""
    out = np.full((n, n, 2), np.nan)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            t = counts.counts([i, j]).astype(np.float64)
            for a in (0, 1):
                den = t[2 * a] + t[2 * a + 1]
                if den > 0:
                    out[i, j, a] = t[2 * a + 1] / den
    return out


def moments_check(expected: MomentTable, observed: MomentTable, tau: float) -> float:
    """Largest deviation between two moment tables (means and cross moments)."""
    return float(max(np.abs(expected.mu - observed.mu).max(),
                     np.abs(expected.rho - observed.rho).max()))


def tree_structure_test(Q: BayesNet, source, c: float, gamma: float, m: int | None = None,
                        rng=None) -> Verdict:
    """Check that all first and second moments of the source match ``Q``'s.

    Step 1 rejects when an estimated ``Pr[X_i = 1 | X_j = a]`` leaves
    ``[c/2, 1 - c/2]``; step 2 rejects when any moment is off by more than ``tau``.
    """
    params = TreeTestParameters.compute(c, gamma)
    src = source_for(source, rng)
    n = Q.n
    check_m(m)
    m = tree_sample_size(n, params.tau) if m is None else m
    counts = draw_counts(src, m)
    cond = conditional_marginals(counts, n)
    off = np.isnan(cond[~np.eye(n, dtype=bool)]).any()
    vals = cond[~np.isnan(cond)]
    if off or np.any(vals < params.c_prime) or np.any(vals > 1 - params.c_prime):
        worst = float(np.nanmin(np.minimum(vals, 1 - vals))) if vals.size else 0.0
        return Verdict(REJECT, worst, params.c_prime, m, "unbalanced-conditional", "structure",
                       {"tau": params.tau})
    observed = MomentTable.from_counts(counts, params.tau)
    dev = moments_check(MomentTable.from_net(Q), observed, params.tau)
    decision = REJECT if dev > params.tau else ACCEPT
    trigger = "moment-deviation" if decision == REJECT else None
    return Verdict(decision, dev, params.tau, m, trigger, "structure", {"tau": params.tau})
