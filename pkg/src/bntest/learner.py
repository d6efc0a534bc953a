"""Plug-in learner for a Bayes net with known structure."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, log

import numpy as np

from .core.dag import DagStructure
from .core.inference import config_probabilities
from .core.net import BayesNet
from .core.sampling import source_for
from .core.tables import rows_to_codes
from .errors import InvalidParameter

M_CONSTANT = 4.0
TAU_CONSTANT = 8.0
PILOT_CONSTANT = 64.0


@dataclass(frozen=True)
class LearnedCpt:
    net: BayesNet
    zeroed: tuple[np.ndarray, ...]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {**self.net.to_dict(), "metadata": self.metadata}


def learner_sample_size(n: int, d: int, eps: float, constant: float = M_CONSTANT) -> int:
    k = (1 << d) * n
    return int(ceil(constant * k / eps ** 2 * log(max(k, 2))))


def learner_threshold(n: int, eps: float, constant: float = TAU_CONSTANT) -> float:
    return constant * log(max(n, 2)) / eps


def learn_known_structure(S: DagStructure, source, eps: float, seed=None,
                          m: int | None = None) -> LearnedCpt:
    """Empirical conditional means, with undersampled configurations set to 0.

    A pilot sample of ``O(log n)`` rows decides which coordinates to flip
    (those whose estimated conditional means sit mostly above 1/2), so the
    zeroing rule acts on the rare value of each flipped coordinate.
    """
    if not 0 < eps < 1:
        raise InvalidParameter("eps must lie in (0, 1)")
    src = source_for(source, seed)
    n, d = S.n, S.d
    m = learner_sample_size(n, d, eps) if m is None else m
    tau = learner_threshold(n, eps)

    pilot = src.draw(int(ceil(PILOT_CONSTANT * log(max(n, 2))))).bits
    flip = np.zeros(n, dtype=bool)
    for i, ps in enumerate(S.parents):
        codes = rows_to_codes(pilot, ps)
        k = 1 << len(ps)
        seen = np.bincount(codes, minlength=k)
        ones = np.bincount(codes, weights=pilot[:, i], minlength=k)
        est = ones[seen > 0] / seen[seen > 0]
        if est.size and est.max() > (1 - est).max():
            flip[i] = True

    bits = src.draw(m).bits ^ flip.astype(np.uint8)
    cpt, zeroed = [], []
    for i, ps in enumerate(S.parents):
        codes = rows_to_codes(bits, ps)
        k = 1 << len(ps)
        seen = np.bincount(codes, minlength=k)
        ones = np.bincount(codes, weights=bits[:, i], minlength=k)
        z = seen < tau
        with np.errstate(divide="ignore", invalid="ignore"):
            est = np.where(z, 0.0, ones / np.maximum(seen, 1))
        cpt.append(est)
        zeroed.append(z)
    learned = BayesNet(S, tuple(cpt)).flipped(np.flatnonzero(flip))
    # flipping back relabels configurations of the children; carry the flags along
    zeroed_back = []
    for i, ps in enumerate(S.parents):
        mask = sum(1 << k for k, p in enumerate(ps) if flip[p])
        z = zeroed[i]
        zeroed_back.append(z[np.arange(z.size) ^ mask] if mask else z)
    meta = {"m": int(m), "tau": float(tau), "flipped_coords": [int(i) for i in np.flatnonzero(flip)],
            "zeroed_configs": [[i, int(a)] for i, z in enumerate(zeroed_back) for a in np.flatnonzero(z)]}
    return LearnedCpt(learned, tuple(zeroed_back), meta)


def light_configurations(P: BayesNet, eps: float) -> list[np.ndarray]:
    """Boolean masks of configurations with ``p_{i,a} Pr_P[Pi_{i,a}] <= eps / (2 n 2^d)``."""
    n, d = P.n, P.structure.d
    cut = eps / (2 * n * (1 << d))
    return [p * pr <= cut for p, pr in zip(P.cpt, config_probabilities(P))]


def light_l1_contribution(P: BayesNet, learned: BayesNet, eps: float, flipped=()) -> float:
    """``||P - R||_1`` where ``R`` is ``P`` with its light entries set to the learned ones.

    Lightness is judged in the frame where ``flipped`` coordinates are inverted,
    as the learner does.
    """
    from .core.distances import l1_exact

    P, learned = P.flipped(flipped), learned.flipped(flipped)
    light = light_configurations(P, eps)
    cpt = [np.where(l, q, p) for l, p, q in zip(light, P.cpt, learned.cpt)]
    return l1_exact(P, P.with_cpt(cpt))
