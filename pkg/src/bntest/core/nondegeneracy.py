"""Conditional covariances, distance to conditional independence, and
non-degeneracy audits of a Bayes net with respect to a structure."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, inf
from typing import Sequence

import numpy as np
from scipy import optimize

from ..errors import TripleEnumerationCapExceeded
from .dag import DagStructure
from .net import BayesNet
from .tables import DEFAULT_ENUMERATION_CAP, check_cap, code_of, marginal

TRIPLE_CAP = 10**8


def _as_cells(table: np.ndarray, n_cond: int) -> np.ndarray:
    """Reshape a (x_i, x_j, x_S) table (bit 0 = x_i) to ``[a, x_j, x_i]``."""
    return np.asarray(table, dtype=np.float64).reshape(1 << n_cond, 2, 2)


def conditional_covariances(table: np.ndarray, n_cond: int):
    """Per-configuration ``Cov[X_i, X_j | X_S = a]`` and normalised mass of ``a``.

    ``table`` is a probability or count vector over codes ``x_i + 2 x_j + 4 a``.
    Configurations with zero mass get covariance 0.
    """
    cells = _as_cells(table, n_cond)
    mass = cells.sum(axis=(1, 2))
    total = mass.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(mass[:, None, None] > 0, cells / mass[:, None, None], 0.0)
    cov = cond[:, 1, 1] * cond[:, 0, 0] - cond[:, 0, 1] * cond[:, 1, 0]
    weight = mass / total if total > 0 else mass
    return cov, weight


def beta_from_table(table: np.ndarray, n_cond: int) -> float:
    """``E_a |Cov[X_i, X_j | X_S = a]|`` for a (x_i, x_j, x_S) table."""
    cov, w = conditional_covariances(table, n_cond)
    return float(np.dot(w, np.abs(cov)))


def ci_table(joint: np.ndarray, n: int, i: int, j: int, S: Sequence[int]) -> np.ndarray:
    return marginal(joint, n, [i, j, *S])


def beta_exact(P: BayesNet | np.ndarray, i: int, j: int, S: Sequence[int] = (), n: int | None = None) -> float:
    joint, n = _joint_n(P, n)
    return beta_from_table(ci_table(joint, n, i, j, S), len(S))


def _joint_n(P, n):
    if isinstance(P, BayesNet):
        check_cap(P.n, DEFAULT_ENUMERATION_CAP)
        return P.joint, P.n
    joint = np.asarray(P, dtype=np.float64)
    return joint, (n if n is not None else int(np.log2(joint.size)))


def ci_surgery(P: BayesNet | np.ndarray, i: int, j: int, S: Sequence[int] = (),
               n: int | None = None) -> np.ndarray:
    """Joint with the (i, j | S) conditional covariances removed.

    Per configuration ``a`` the four cells of ``(X_i, X_j)`` move by
    ``-(-1)^(b+c) Cov[X_i,X_j | a] Pr[a]``; the rest of the joint keeps its
    conditional law given ``(X_i, X_j, X_S)``.  The result is at TV distance
    exactly ``2 beta`` from the input.
    """
    joint, n = _joint_n(P, n)
    S = list(S)
    tab = ci_table(joint, n, i, j, S)
    cov, w = conditional_covariances(tab, len(S))
    sign = np.array([[1.0, -1.0], [-1.0, 1.0]])  # [x_j, x_i] -> (-1)^(b+c)
    total = tab.sum()
    delta = -(cov * w * total)[:, None, None] * sign[None, :, :]
    new_tab = (_as_cells(tab, len(S)) + delta).reshape(-1)
    code = code_of(n, [i, j, *S])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(tab > 0, new_tab / tab, 0.0)
    return joint * ratio[code]


def _product_cells(params: np.ndarray, k: int) -> np.ndarray:
    logits, u, v = params[:k], params[k:2 * k], params[2 * k:]
    r = np.exp(logits - logits.max())
    r /= r.sum()
    pu = 1.0 / (1.0 + np.exp(-u))
    pv = 1.0 / (1.0 + np.exp(-v))
    xi = np.stack([1 - pu, pu], axis=1)  # [a, x_i]
    xj = np.stack([1 - pv, pv], axis=1)  # [a, x_j]
    return r[:, None, None] * xj[:, :, None] * xi[:, None, :]


def _logit(p):
    p = np.clip(p, 1e-9, 1 - 1e-9)
    return np.log(p / (1 - p))


def distance_to_ci(P: BayesNet | np.ndarray, i: int, j: int, S: Sequence[int] = (),
                   n: int | None = None, restarts: int = 3, seed: int = 0) -> float:
    """Numerical TV distance from ``P`` to the set where ``X_i _|_ X_j | X_S``.

    Only the marginal on ``{i, j} u S`` matters.  The search space is
    parameterised as configuration masses times a product law per
    configuration; Nelder-Mead is started from the surgery point and from
    random points.  Returns the best value found together with the surgery
    value, so the result never exceeds ``2 beta``.
    """
    joint, n = _joint_n(P, n)
    S = list(S)
    k = 1 << len(S)
    tab = _as_cells(ci_table(joint, n, i, j, S), len(S))
    tab = tab / tab.sum()
    mass = tab.sum(axis=(1, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        pi = np.where(mass > 0, tab[:, :, 1].sum(axis=1) / mass, 0.5)
        pj = np.where(mass > 0, tab[:, 1, :].sum(axis=1) / mass, 0.5)

    def objective(x):
        return 0.5 * np.abs(tab - _product_cells(x, k)).sum()

    start = np.concatenate([np.log(np.maximum(mass, 1e-12)), _logit(pi), _logit(pj)])
    surgery_value = 2.0 * beta_from_table(tab.reshape(-1), len(S))
    best = min(surgery_value, objective(start))
    rng = np.random.default_rng(seed)
    starts = [start] + [start + rng.normal(scale=0.5, size=start.size) for _ in range(restarts - 1)]
    for x0 in starts:
        res = optimize.minimize(objective, x0, method="Nelder-Mead",
                                options={"maxiter": 500 * start.size, "xatol": 1e-7, "fatol": 1e-10})
        best = min(best, float(res.fun))
    return best


# --- non-degeneracy conditions -------------------------------------------------

@dataclass(frozen=True)
class ConditionTriple:
    """Pair ``i < j`` and conditioning set ``S`` with the conditions it meets."""
    i: int
    j: int
    S: tuple[int, ...]
    conditions: frozenset[str]


def triple_budget(n: int, d: int) -> int:
    return n * (n - 1) * sum(comb(max(n - 2, 0), s) for s in range(min(d, max(n - 2, 0)) + 1))


def nondegeneracy_conditions(structure: DagStructure, d: int | None = None,
                             cap: int = TRIPLE_CAP) -> list[ConditionTriple]:
    """All ``(i, j, S)``, ``|S| <= d``, meeting one of the four conditions.

    Ordered pairs are scanned and merged into unordered ones (the
    conditional-independence question is symmetric in ``i, j``).
    """
    n = structure.n
    d = structure.d if d is None else d
    if float(n) ** (d + 2) > cap:
        raise TripleEnumerationCapExceeded(f"n^(d+2) = {n}^{d + 2} exceeds {cap}")
    pa = [set(ps) for ps in structure.parents]
    found: dict[tuple, set[str]] = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            rest = [v for v in range(n) if v not in (i, j)]
            for size in range(min(d, len(rest)) + 1):
                for S in combinations(rest, size):
                    s_set = set(S)
                    conds = set()
                    if i in pa[j]:
                        conds.add("i")
                    if any(i in pa[k] and j in pa[k] for k in S):
                        conds.add("ii")
                    if any(i in pa[k] and k in pa[j] for k in range(n) if k not in s_set and k not in (i, j)):
                        conds.add("iii")
                    if any(k not in s_set for k in pa[i] & pa[j]):
                        conds.add("iv")
                    if conds:
                        key = (min(i, j), max(i, j), S)
                        found.setdefault(key, set()).update(conds)
    return [ConditionTriple(a, b, S, frozenset(c)) for (a, b, S), c in sorted(found.items())]


@dataclass(frozen=True)
class TripleInterval:
    triple: ConditionTriple
    beta: float

    @property
    def lo(self) -> float:
        return self.beta / 3.0

    @property
    def hi(self) -> float:
        return 2.0 * self.beta


@dataclass(frozen=True)
class NondegeneracyReport:
    intervals: tuple[TripleInterval, ...]

    @property
    def gamma_lower(self) -> float:
        """Certified non-degeneracy level: min over triples of ``beta / 3``."""
        return min((t.lo for t in self.intervals), default=inf)

    def weakest(self) -> TripleInterval | None:
        return min(self.intervals, key=lambda t: t.beta, default=None)


def nondegeneracy_interval(P: BayesNet, d: int | None = None,
                           structure: DagStructure | None = None) -> NondegeneracyReport:
    """Bracket the distance to conditional independence of every triple that the
    non-degeneracy definition constrains (w.r.t. ``structure``, default P's own)."""
    check_cap(P.n, DEFAULT_ENUMERATION_CAP)
    structure = P.structure if structure is None else structure
    triples = nondegeneracy_conditions(structure, d)
    joint = P.joint
    out = [TripleInterval(t, beta_from_table(ci_table(joint, P.n, t.i, t.j, t.S), len(t.S)))
           for t in triples]
    return NondegeneracyReport(tuple(out))


def tree_nondegeneracy(P: BayesNet) -> float:
    """``min_i |p_{i,1} - p_{i,0}|`` over non-root nodes of a tree net."""
    gaps = [abs(float(t[1] - t[0])) for ps, t in zip(P.parents, P.cpt) if len(ps) == 1]
    return min(gaps, default=inf)
