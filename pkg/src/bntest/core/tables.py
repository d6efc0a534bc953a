"""Helpers over full probability/count tables indexed by ``x in {0,1}^n``.

Index convention: table entry ``t`` corresponds to the string with
``x_i = (t >> i) & 1``, so node 0 is the least significant bit.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from ..errors import EnumerationCapExceeded

DEFAULT_ENUMERATION_CAP = 25


def check_cap(n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> None:
    if n > cap:
        raise EnumerationCapExceeded(f"n={n} exceeds the enumeration cap {cap}")


@lru_cache(maxsize=8)
def _index(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def bit_column(n: int, i: int) -> np.ndarray:
    return ((_index(n) >> i) & 1).astype(np.int64)


def code_of(n: int, coords: Sequence[int]) -> np.ndarray:
    """Code of ``x[coords]`` (bit k = coords[k]) for every table index."""
    idx = _index(n)
    code = np.zeros(1 << n, dtype=np.int64)
    for k, c in enumerate(coords):
        code |= ((idx >> c) & 1) << k
    return code


def marginal(table: np.ndarray, n: int, coords: Sequence[int]) -> np.ndarray:
    """Marginalise a full table onto ``coords``; result indexed by their code."""
    coords = list(coords)
    if not coords:
        return np.array([table.sum()])
    # reshape trick: axis for node i is n-1-i in C order
    t = np.asarray(table).reshape((2,) * n)
    keep_axes = [n - 1 - c for c in coords]
    drop = tuple(ax for ax in range(n) if ax not in keep_axes)
    m = t.sum(axis=drop) if drop else t
    # remaining axes are in ascending axis order == descending node order
    remaining = sorted(keep_axes)
    perm = [remaining.index(n - 1 - c) for c in reversed(coords)]
    m = np.transpose(m, perm)
    return np.ascontiguousarray(m).reshape(-1)


def rows_to_codes(bits: np.ndarray, coords: Sequence[int] | None = None) -> np.ndarray:
    """Integer code of each row restricted to ``coords`` (default: all columns)."""
    bits = np.asarray(bits)
    if coords is None:
        coords = range(bits.shape[1])
    code = np.zeros(bits.shape[0], dtype=np.int64)
    for k, c in enumerate(coords):
        code |= bits[:, c].astype(np.int64) << k
    return code


def codes_to_rows(codes: np.ndarray, n: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.uint8)
