"""Bayes nets and product distributions over {0,1}^n."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .dag import DagStructure, ParentalConfiguration, assignment_to_code, validate_structure
from .tables import DEFAULT_ENUMERATION_CAP, bit_column, check_cap, code_of


def _freeze(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BayesNet:
    """Binary Bayes net: a topologically numbered DAG plus its CPT.

    ``cpt[i][code]`` is ``Pr[X_i = 1 | X_parents(i) = a]`` with ``code`` the
    integer whose bit k is ``a[k]`` (parents in ascending order).
    """
    structure: DagStructure
    cpt: tuple[np.ndarray, ...]

    def __post_init__(self):
        cpt = tuple(_freeze(c) for c in self.cpt)
        if len(cpt) != self.structure.n:
            raise ValueError("cpt needs one table per node")
        for i, (ps, table) in enumerate(zip(self.structure.parents, cpt)):
            if table.shape != (1 << len(ps),):
                raise ValueError(f"node {i}: expected {1 << len(ps)} cpt entries, got {table.shape}")
            if np.any(table < 0) or np.any(table > 1) or not np.all(np.isfinite(table)):
                raise ValueError(f"node {i}: cpt entries must lie in [0, 1]")
        object.__setattr__(self, "cpt", cpt)

    @property
    def n(self) -> int:
        return self.structure.n

    @property
    def parents(self):
        return self.structure.parents

    def p(self, config: ParentalConfiguration | tuple) -> float:
        node, assignment = config
        return float(self.cpt[node][assignment_to_code(assignment)])

    def cpt_vector(self) -> np.ndarray:
        """All cpt entries concatenated in (node, code) order."""
        return np.concatenate(self.cpt) if self.cpt else np.zeros(0)

    def with_cpt(self, cpt: Sequence[Sequence[float]]) -> "BayesNet":
        return BayesNet(self.structure, tuple(cpt))

    def same_structure(self, other: "BayesNet") -> bool:
        return self.structure.parents == other.structure.parents

    @cached_property
    def joint(self) -> np.ndarray:
        """Exact joint table (see :func:`bntest.core.inference.exact_joint`)."""
        return _joint(self, DEFAULT_ENUMERATION_CAP)

    def flipped(self, coords: Sequence[int]) -> "BayesNet":
        """Distribution of ``X xor e_coords`` for ``X ~ self`` (same structure)."""
        flip = set(int(c) for c in coords)
        new = []
        for i, ps in enumerate(self.parents):
            table = np.array(self.cpt[i])
            mask = sum(1 << k for k, p in enumerate(ps) if p in flip)
            if mask:
                table = table[np.arange(table.size) ^ mask]
            if i in flip:
                table = 1.0 - table
            new.append(table)
        return BayesNet(self.structure, tuple(new))

    # --- serialisation -------------------------------------------------
    def to_dict(self) -> dict:
        entries = []
        for cfg in self.structure.configurations():
            entries.append({"node": cfg.node, "assignment": cfg.bitstring, "p": self.p(cfg)})
        return {"n": self.n, "parents": [list(ps) for ps in self.parents], "cpt": entries}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, obj: Mapping) -> "BayesNet":
        n = int(obj["n"])
        raw_parents = [list(map(int, ps)) for ps in obj["parents"]]
        if len(raw_parents) != n:
            raise ValueError("'parents' must list every node")
        tables = [np.full(1 << len(set(ps)), np.nan) for ps in raw_parents]
        for e in obj["cpt"]:
            node = int(e["node"])
            bits = e.get("assignment", "") or ""
            k = len(set(raw_parents[node]))
            if len(bits) != k:
                raise ValueError(f"node {node}: assignment {bits!r} should have {k} bits")
            tables[node][assignment_to_code([int(b) for b in bits])] = float(e["p"])
        for i, t in enumerate(tables):
            if np.isnan(t).any():
                raise ValueError(f"node {i}: missing cpt entries")
        structure = validate_structure(raw_parents)
        if structure.order != tuple(range(n)):
            tables = _relabel_tables(raw_parents, tables, structure)
        return cls(structure, tuple(tables))

    @classmethod
    def from_json(cls, text: str) -> "BayesNet":
        return cls.from_dict(json.loads(text))

    @classmethod
    def product(cls, means: Sequence[float]) -> "BayesNet":
        means = list(means)
        return cls(DagStructure.empty(len(means)), tuple([m] for m in means))


def _relabel_tables(raw_parents, tables, structure: DagStructure):
    new_label = {old: new for new, old in enumerate(structure.order)}
    out = []
    for new_i, old_i in enumerate(structure.order):
        old_ps = sorted(set(raw_parents[old_i]))
        new_ps = structure.parents[new_i]
        table = tables[old_i]
        relabelled = np.empty_like(table)
        for old_code in range(table.size):
            values = {new_label[p]: (old_code >> k) & 1 for k, p in enumerate(old_ps)}
            new_code = sum(values[p] << k for k, p in enumerate(new_ps))
            relabelled[new_code] = table[old_code]
        out.append(relabelled)
    return out


def _joint(net: BayesNet, cap: int) -> np.ndarray:
    n = net.n
    check_cap(n, cap)
    joint = np.ones(1 << n, dtype=np.float64)
    for i, ps in enumerate(net.parents):
        p1 = net.cpt[i][code_of(n, ps)] if ps else np.full(1 << n, net.cpt[i][0])
        xi = bit_column(n, i)
        joint *= np.where(xi == 1, p1, 1.0 - p1)
    joint.setflags(write=False)
    return joint


@dataclass(frozen=True, eq=False)
class ProductSpec:
    """Product distribution over {0,1}^n given by its mean vector."""
    means: np.ndarray

    def __post_init__(self):
        m = _freeze(self.means).reshape(-1)
        if m.size < 1:
            raise ValueError("a product distribution needs n >= 1")
        if np.any(m < 0) or np.any(m > 1):
            raise ValueError("means must lie in [0, 1]")
        object.__setattr__(self, "means", m)

    @property
    def n(self) -> int:
        return self.means.size

    def as_net(self) -> BayesNet:
        return BayesNet.product(self.means)

    @property
    def joint(self) -> np.ndarray:
        return self.as_net().joint

    def to_dict(self) -> dict:
        return {"means": [float(x) for x in self.means]}

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ProductSpec":
        return cls(np.array(obj["means"], dtype=float))
