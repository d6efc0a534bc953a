"""Sample batches and pull-based sample sources.

A source hands out fresh i.i.d. samples on request.  Besides raw rows, a
source can answer two aggregate requests that testers use at large sample
sizes; the default implementations draw rows in chunks, and sources with a
closed form override them with draws from the exact same law:

* ``column_counts(lengths)``: number of ones in column ``i`` among the first
  ``lengths[i]`` rows of a fresh block;
* ``draw_table(m)``: histogram over ``{0,1}^n`` of ``m`` fresh rows.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import SampleSourceExhausted
from .net import BayesNet, ProductSpec
from .tables import check_cap, marginal, rows_to_codes

CHUNK_ROWS = 1 << 16
TABLE_FASTPATH_MAX_N = 20


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """``m`` samples as an ``m x n`` bit matrix."""
    bits: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=np.uint8)
        if b.ndim != 2:
            raise ValueError("bits must be a 2-d array")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    @property
    def n(self) -> int:
        return self.bits.shape[1]

    def counts(self, coords: Sequence[int] = ()) -> np.ndarray:
        """Occurrences of each assignment of ``coords`` (bit k = coords[k])."""
        coords = list(coords)
        return np.bincount(rows_to_codes(self.bits, coords), minlength=1 << len(coords))

    def column_sums(self) -> np.ndarray:
        return self.bits.sum(axis=0, dtype=np.int64)

    def table(self) -> "CountTable":
        return CountTable(self.n, np.bincount(rows_to_codes(self.bits), minlength=1 << self.n))

    # --- text format: header "m n seed", then one row of 0/1 chars per sample
    def dumps(self) -> str:
        seed = -1 if self.seed is None else self.seed
        lines = [f"{self.m} {self.n} {seed}"]
        lines += ["".join("1" if v else "0" for v in row) for row in self.bits]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "SampleBatch":
        lines = text.strip("\n").split("\n")
        m, n, seed = (int(t) for t in lines[0].split())
        rows = lines[1:1 + m]
        if len(rows) != m or any(len(r) != n for r in rows):
            raise ValueError("sample file does not match its header")
        bits = np.array([[c == "1" for c in r] for r in rows], dtype=np.uint8).reshape(m, n)
        return cls(bits, None if seed < 0 else seed)


@dataclass(frozen=True, eq=False)
class CountTable:
    """Histogram of ``m`` samples over ``{0,1}^n`` (a sufficient statistic)."""
    n: int
    hist: np.ndarray

    @property
    def m(self) -> int:
        return int(self.hist.sum())

    def counts(self, coords: Sequence[int] = ()) -> np.ndarray:
        return np.rint(marginal(self.hist.astype(np.float64), self.n, coords)).astype(np.int64)

    def column_sums(self) -> np.ndarray:
        return np.array([self.counts([i])[1] for i in range(self.n)], dtype=np.int64)


class SampleSource:
    """Base class: subclasses implement ``_draw_rows``."""

    n: int

    def __init__(self, n: int, rng=None):
        self.n = n
        self.rng = as_rng(rng)
        self.samples_drawn = 0

    def _draw_rows(self, m: int) -> np.ndarray:
        raise NotImplementedError

    def draw(self, m: int) -> SampleBatch:
        if m < 0:
            raise ValueError("m must be >= 0")
        rows = self._draw_rows(m) if m else np.zeros((0, self.n), dtype=np.uint8)
        self.samples_drawn += m
        return SampleBatch(rows)

    def _chunks(self, m: int):
        left = m
        while left > 0:
            k = min(left, CHUNK_ROWS)
            yield self.draw(k).bits
            left -= k

    def column_counts(self, lengths: Sequence[int]) -> np.ndarray:
        lengths = np.asarray(lengths, dtype=np.int64)
        total = int(lengths.max()) if lengths.size else 0
        out = np.zeros(self.n, dtype=np.int64)
        start = 0
        for rows in self._chunks(total):
            k = rows.shape[0]
            take = np.clip(lengths - start, 0, k)
            mask = np.arange(k)[:, None] < take[None, :]
            out += (rows.astype(bool) & mask).sum(axis=0)
            start += k
        return out

    def draw_table(self, m: int) -> CountTable:
        hist = np.zeros(1 << self.n, dtype=np.int64)
        for rows in self._chunks(m):
            hist += np.bincount(rows_to_codes(rows), minlength=1 << self.n)
        return CountTable(self.n, hist)


class NetSource(SampleSource):
    """Ancestral sampler for a Bayes net."""

    def __init__(self, net: BayesNet, rng=None):
        super().__init__(net.n, rng)
        self.net = net

    def _draw_rows(self, m: int) -> np.ndarray:
        return ancestral_rows(self.net, m, self.rng)

    def draw_table(self, m: int) -> CountTable:
        if self.n > TABLE_FASTPATH_MAX_N:
            return super().draw_table(m)
        self.samples_drawn += m
        return CountTable(self.n, _multinomial(self.rng, m, self.net.joint))


class ProductSource(SampleSource):
    """Sampler for a product distribution with the given means."""

    def __init__(self, spec: ProductSpec | Sequence[float], rng=None):
        spec = spec if isinstance(spec, ProductSpec) else ProductSpec(np.asarray(spec, float))
        super().__init__(spec.n, rng)
        self.spec = spec

    def _draw_rows(self, m: int) -> np.ndarray:
        return (self.rng.random((m, self.n)) < self.spec.means).astype(np.uint8)

    def column_counts(self, lengths) -> np.ndarray:
        lengths = np.asarray(lengths, dtype=np.int64)
        self.samples_drawn += int(lengths.max()) if lengths.size else 0
        return self.rng.binomial(lengths, self.spec.means).astype(np.int64)

    def draw_table(self, m: int) -> CountTable:
        if self.n > TABLE_FASTPATH_MAX_N:
            return super().draw_table(m)
        self.samples_drawn += m
        return CountTable(self.n, _multinomial(self.rng, m, self.spec.joint))


class BatchSource(SampleSource):
    """Replays a fixed batch; raises :class:`SampleSourceExhausted` past its end."""

    def __init__(self, batch: SampleBatch | np.ndarray):
        batch = batch if isinstance(batch, SampleBatch) else SampleBatch(batch)
        super().__init__(batch.n, None)
        self.batch = batch
        self.pos = 0

    def _draw_rows(self, m: int) -> np.ndarray:
        if self.pos + m > self.batch.m:
            raise SampleSourceExhausted(
                f"requested {m} samples, {self.batch.m - self.pos} remain")
        rows = self.batch.bits[self.pos:self.pos + m]
        self.pos += m
        return np.array(rows)


class FlippedSource(SampleSource):
    """``X xor mask`` for ``X`` drawn from ``inner``."""

    def __init__(self, inner: SampleSource, mask: Sequence[bool]):
        super().__init__(inner.n, inner.rng)
        self.inner = inner
        self.mask = np.asarray(mask, dtype=bool)
        self._xor = int(sum(1 << i for i in np.flatnonzero(self.mask)))

    def _draw_rows(self, m: int) -> np.ndarray:
        return self.inner.draw(m).bits ^ self.mask.astype(np.uint8)

    def column_counts(self, lengths) -> np.ndarray:
        lengths = np.asarray(lengths, dtype=np.int64)
        ones = self.inner.column_counts(lengths)
        self.samples_drawn += int(lengths.max()) if lengths.size else 0
        return np.where(self.mask, lengths - ones, ones)

    def draw_table(self, m: int) -> CountTable:
        t = self.inner.draw_table(m)
        self.samples_drawn += m
        idx = np.arange(1 << self.n) ^ self._xor
        return CountTable(self.n, t.hist[idx])


class RerandomizedSource(SampleSource):
    """Each coordinate independently replaced by a fair coin with probability ``prob``."""

    def __init__(self, inner: SampleSource, prob: float, rng=None):
        super().__init__(inner.n, inner.rng if rng is None else rng)
        self.inner = inner
        self.prob = float(prob)

    def _draw_rows(self, m: int) -> np.ndarray:
        rows = self.inner.draw(m).bits.copy()
        if self.prob > 0:
            hit = self.rng.random(rows.shape) < self.prob
            coin = self.rng.integers(0, 2, size=rows.shape, dtype=np.uint8)
            rows[hit] = coin[hit]
        return rows

    def column_counts(self, lengths) -> np.ndarray:
        # per column: H of the L bits are hit (uniform positions), the hit bits
        # lose a hypergeometric share of the ones and gain Bin(H, 1/2) fresh ones
        lengths = np.asarray(lengths, dtype=np.int64)
        ones = self.inner.column_counts(lengths)
        self.samples_drawn += int(lengths.max()) if lengths.size else 0
        if self.prob <= 0:
            return ones
        hits = self.rng.binomial(lengths, self.prob)
        lost = self.rng.hypergeometric(ones, lengths - ones, hits) if lengths.size else hits
        return ones - lost + self.rng.binomial(hits, 0.5)


def _multinomial(rng: np.random.Generator, m: int, probs: np.ndarray) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    p = p / p.sum()
    return rng.multinomial(m, p).astype(np.int64)


def ancestral_rows(P: BayesNet, m: int, rng=None) -> np.ndarray:
    rng = as_rng(rng)
    rows = np.zeros((m, P.n), dtype=np.uint8)
    u = rng.random((m, P.n))
    for i, ps in enumerate(P.parents):
        if ps:
            code = rows_to_codes(rows, ps)
            p1 = P.cpt[i][code]
        else:
            p1 = P.cpt[i][0]
        rows[:, i] = u[:, i] < p1
    return rows


def sample(P: BayesNet | ProductSpec, m: int, seed=None) -> SampleBatch:
    """``m`` ancestral samples; deterministic given ``seed``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    net = P.as_net() if isinstance(P, ProductSpec) else P
    s = seed if isinstance(seed, (int, np.integer)) else None
    return SampleBatch(ancestral_rows(net, m, seed), s)


def source_for(dist, rng=None) -> SampleSource:
    """Wrap a BayesNet / ProductSpec / SampleBatch / SampleSource as a source."""
    if isinstance(dist, SampleSource):
        return dist
    if isinstance(dist, ProductSpec):
        return ProductSource(dist, rng)
    if isinstance(dist, BayesNet):
        if dist.structure.d == 0:
            return ProductSource(ProductSpec(np.array([t[0] for t in dist.cpt])), rng)
        return NetSource(dist, rng)
    if isinstance(dist, (SampleBatch, np.ndarray)):
        return BatchSource(dist)
    raise TypeError(f"cannot build a sample source from {type(dist).__name__}")


def goodness_of_fit_pvalue(batch: SampleBatch, P: BayesNet) -> float:
    """Pearson chi-square p-value of the batch against ``P``'s exact joint."""
    from scipy import stats

    check_cap(P.n)
    observed = batch.table().hist.astype(float)
    expected = P.joint * batch.m
    keep = expected > 0
    return float(stats.chisquare(observed[keep], expected[keep]).pvalue)


def draw_counts(source: SampleSource, m: int):
    """``m`` fresh samples as a sufficient statistic: a full histogram when
    ``n`` is small enough, otherwise the raw batch."""
    if source.n <= TABLE_FASTPATH_MAX_N:
        return source.draw_table(m)
    return source.draw(m)


class PermutedSource(SampleSource):
    """Columns reordered: output column ``k`` is inner column ``order[k]``."""

    def __init__(self, inner: SampleSource, order):
        super().__init__(inner.n, inner.rng)
        self.inner = inner
        self.order = np.asarray(order, dtype=np.int64)

    def _draw_rows(self, m: int) -> np.ndarray:
        return self.inner.draw(m).bits[:, self.order]
