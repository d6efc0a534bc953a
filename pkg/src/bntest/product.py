"""Identity and closeness testers for product distributions over {0,1}^n.

Both testers are Poissonized: coordinate ``i`` is read on its own
``Poisson(m)``-length prefix of a fresh sample block, which makes the
per-coordinate counts independent Poisson variables.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import ceil, log, sqrt
from typing import Sequence

import numpy as np

from .core.net import ProductSpec
from .core.sampling import FlippedSource, RerandomizedSource, SampleSource, as_rng, source_for
from .errors import InvalidParameter

ACCEPT = "accept"
REJECT = "reject"

IDENTITY_CONSTANT = 2716.0
CLOSENESS_DEFAULT_C = 10.0
# Output of ``harness.calibrate_closeness_constant()`` (n in {20, 50}, eps=0.3, T=200).
CLOSENESS_CALIBRATED_C = 20000.0
MEAN_ACCURACY = 1.0 / 64
DISCREPANCY = 1.0 / 32
SWAP_LEVEL = 43.0 / 64
PREPROCESS_FAILURE = 0.1


@dataclass(frozen=True)
class Verdict:
    """Outcome of one tester invocation."""
    decision: str
    statistic: float
    threshold: float
    samples_used: int
    trigger: str | None = None
    stage: str | None = None
    details: dict = field(default_factory=dict, compare=False)

    @property
    def accepted(self) -> bool:
        return self.decision == ACCEPT

    def to_dict(self) -> dict:
        return {"decision": self.decision, "statistic": float(self.statistic),
                "threshold": float(self.threshold), "samples_used": int(self.samples_used),
                "trigger": self.trigger}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj) -> "Verdict":
        return cls(obj["decision"], float(obj["statistic"]), float(obj["threshold"]),
                   int(obj["samples_used"]), obj.get("trigger"))


def decide(statistic: float, threshold: float, samples_used: int, stage: str | None = None,
           **details) -> Verdict:
    """Reject iff ``statistic >= threshold``."""
    decision = REJECT if statistic >= threshold else ACCEPT
    return Verdict(decision, float(statistic), float(threshold), int(samples_used), None, stage, details)


def forced_reject(trigger: str, statistic: float, threshold: float, samples_used: int,
                  stage: str | None = None, **details) -> Verdict:
    return Verdict(REJECT, float(statistic), float(threshold), int(samples_used), trigger, stage, details)


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise InvalidParameter(f"eps must lie in (0, 1), got {eps}")


def check_m(m) -> None:
    if m is not None and m < 1:
        raise InvalidParameter(f"sample size must be >= 1, got {m}")


def _as_spec(q) -> ProductSpec:
    return q if isinstance(q, ProductSpec) else ProductSpec(np.asarray(q, dtype=float))


# --- preprocessing ----------------------------------------------------------

def balance_transform(source, n: int, eps: float, rng=None):
    """Re-randomize every coordinate with probability ``2 gamma0``, ``gamma0 = eps / (16 n)``.

    Returns ``(transformed source, gamma0)``.  The transformed law of a
    product with means ``p`` is the product with means ``(1 - 2 gamma0) p + gamma0``.
    """
    _check_eps(eps)
    gamma0 = eps / (16.0 * n)
    src = source_for(source, rng)
    return RerandomizedSource(src, 2.0 * gamma0, rng if rng is not None else None), gamma0


def balanced_means(q, gamma0: float) -> ProductSpec:
    q = _as_spec(q)
    return ProductSpec((1.0 - 2.0 * gamma0) * q.means + gamma0)


def flip_normalize(q, source=None):
    """Flip every coordinate with ``q_i > 1/2`` in both the reference and the stream.

    Returns ``(q', flipped source or None, mask)``.
    """
    q = _as_spec(q)
    mask = q.means > 0.5
    q2 = ProductSpec(np.where(mask, 1.0 - q.means, q.means))
    if source is None:
        return q2, None, mask
    src = source_for(source)
    return q2, (FlippedSource(src, mask) if mask.any() else src), mask


# --- identity -------------------------------------------------------------

def identity_sample_size(n: int, eps: float, constant: float = IDENTITY_CONSTANT) -> int:
    return int(ceil(constant * sqrt(n) / eps ** 2))


def identity_statistic(W, m: float, q) -> float:
    """``sum_i ((W_i - m q_i)^2 - W_i) / (q_i (1 - q_i))``."""
    W = np.asarray(W, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    return float(np.sum(((W - m * q) ** 2 - W) / (q * (1.0 - q))))


def product_identity_test(q, source, eps: float, constant_override: float | None = None,
                          rng=None, m: int | None = None) -> Verdict:
    """Poissonized chi-square identity test against a known product ``q``.

    Assumes ``q`` already lies in ``[gamma, 1/2]^n`` (see
    :func:`product_identity_pipeline` for the full reduction).
    """
    _check_eps(eps)
    q = _as_spec(q)
    src = source_for(source, rng)
    rng = as_rng(rng) if rng is not None else src.rng
    n = q.n
    check_m(m)
    if m is None:
        m = identity_sample_size(n, eps, constant_override or IDENTITY_CONSTANT)
    tau = eps ** 2 / 4.0
    threshold = tau * m * m
    M = rng.poisson(m, size=n)
    if M.max() > 2 * m:
        return forced_reject("poisson-overflow", threshold, threshold, 0, m=m)
    W = src.column_counts(M)
    stat = identity_statistic(W, m, q.means)
    return decide(stat, threshold, int(M.max()), m=m)


def product_identity_pipeline(q, source, eps: float, constant_override: float | None = None,
                              rng=None) -> Verdict:
    """Balance, flip, then run the identity test at ``eps / 2``."""
    _check_eps(eps)
    q = _as_spec(q)
    src = source_for(source, rng)
    balanced, gamma0 = balance_transform(src, q.n, eps)
    q_bal = balanced_means(q, gamma0)
    q_norm, flipped, _ = flip_normalize(q_bal, balanced)
    return product_identity_test(q_norm, flipped, eps / 2.0, constant_override, rng)


# --- closeness ------------------------------------------------------------

def closeness_sample_size(n: int, eps: float, constant: float = CLOSENESS_DEFAULT_C) -> int:
    return int(ceil(constant * max(sqrt(n) / eps ** 2, n ** 0.75 / eps)))


def heavy_statistic(W, V) -> float:
    """``sum ((W - V)^2 - (W + V)) / (W + V)`` with empty summands counted as 0."""
    W = np.asarray(W, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    s = W + V
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(s > 0, ((W - V) ** 2 - s) / s, 0.0)
    return float(terms.sum())


def light_statistic(W, V) -> float:
    W = np.asarray(W, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    return float(np.sum((W - V) ** 2 - (W + V)))


def preprocess_sample_size(n: int, accuracy: float = MEAN_ACCURACY,
                           failure: float = PREPROCESS_FAILURE) -> int:
    """Hoeffding size so all 2n mean estimates are ``accuracy``-close w.p. ``1 - failure``."""
    return int(ceil(log(4.0 * n / failure) / (2.0 * accuracy ** 2)))


def product_closeness_test(source_p, source_q, eps: float, n: int | None = None,
                           constant_override: float | None = None, rng=None,
                           m: int | None = None) -> Verdict:
    """Two-sample closeness test for unknown products (heavy/light bucketing)."""
    _check_eps(eps)
    check_m(m)
    sp = source_for(source_p, rng)
    sq = source_for(source_q, rng)
    rng = as_rng(rng) if rng is not None else sp.rng
    n = sp.n if n is None else n
    if sq.n != n or sp.n != n:
        raise InvalidParameter("sources disagree on the dimension")
    start_p, start_q = sp.samples_drawn, sq.samples_drawn

    def used():
        return (sp.samples_drawn - start_p) + (sq.samples_drawn - start_q)

    # preprocessing: estimate all means, reject on a gross discrepancy, swap high ones
    k = preprocess_sample_size(n)
    p_hat = sp.column_counts(np.full(n, k)) / k
    q_hat = sq.column_counts(np.full(n, k)) / k
    gap = np.abs(p_hat - q_hat)
    if gap.max() > DISCREPANCY:
        return forced_reject("preprocess-discrepancy", float(gap.max()), DISCREPANCY, used(),
                             stage="preprocess")
    swap = p_hat > SWAP_LEVEL
    if swap.any():
        sp, sq = FlippedSource(sp, swap), FlippedSource(sq, swap)

    C = constant_override if constant_override is not None else CLOSENESS_DEFAULT_C
    m = closeness_sample_size(n, eps, C) if m is None else m
    M = rng.poisson(m, size=n)
    Mp = rng.poisson(m, size=n)
    seen = sp.column_counts(np.full(n, m)) + sq.column_counts(np.full(n, m))
    heavy = seen > 0
    if max(M.max(), Mp.max()) > 2 * m:
        return forced_reject("poisson-overflow", np.inf, 2 * m, used(), stage="poisson", m=m)

    W = sp.column_counts(np.where(heavy, M, 0))
    V = sq.column_counts(np.where(heavy, Mp, 0))
    w_heavy = heavy_statistic(W[heavy], V[heavy])
    t_heavy = m * eps ** 2 / 12000.0
    if w_heavy >= t_heavy:
        return decide(w_heavy, t_heavy, used(), stage="heavy", m=m, heavy=int(heavy.sum()))

    light = ~heavy
    W2 = sp.column_counts(np.where(light, M, 0))
    V2 = sq.column_counts(np.where(light, Mp, 0))
    w_light = light_statistic(W2[light], V2[light])
    t_light = m * m * eps ** 2 / (600.0 * n)
    return decide(w_light, t_light, used(), stage="light", m=m, heavy=int(heavy.sum()),
                  heavy_statistic=w_heavy)


# --- tolerant reduction map -------------------------------------------------

def tolerant_map_fdelta(p: Sequence[float], delta: float) -> ProductSpec:
    """Occupancy product of ``Poisson(delta)`` draws from ``p`` over ``[n]``:
    coordinate ``i`` is 1 iff element ``i`` was drawn at least once."""
    if not 0 < delta <= 1:
        raise InvalidParameter("delta must lie in (0, 1]")
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidParameter("p must be a probability vector")
    return ProductSpec(-np.expm1(-delta * p))
