"""DAG structures over binary nodes and their parental configurations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

from ..errors import CycleDetected, ParentIndexOutOfRange


class ParentalConfiguration(NamedTuple):
    """Event ``X_parents(node) = assignment``.

    ``assignment[k]`` is the value of the k-th parent in ascending index order.
    """
    node: int
    assignment: tuple[int, ...]

    @property
    def code(self) -> int:
        return assignment_to_code(self.assignment)

    @property
    def bitstring(self) -> str:
        return "".join(str(b) for b in self.assignment)


def assignment_to_code(assignment: Sequence[int]) -> int:
    # bit k of the code holds the k-th parent (ascending index)
    return sum(int(b) << k for k, b in enumerate(assignment))


def code_to_assignment(code: int, k: int) -> tuple[int, ...]:
    return tuple((code >> t) & 1 for t in range(k))


@dataclass(frozen=True)
class DagStructure:
    """A DAG on nodes ``0..n-1`` numbered topologically (parents < child).

    ``order[new] = original`` records the relabelling applied by
    :func:`validate_structure`; it is the identity when the input was already
    topologically numbered.
    """
    n: int
    parents: tuple[tuple[int, ...], ...]
    order: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if len(self.parents) != self.n:
            raise ValueError("parents must have one entry per node")
        for i, ps in enumerate(self.parents):
            if list(ps) != sorted(set(ps)):
                raise ValueError(f"parents of node {i} must be sorted and distinct")
            if any(p >= i or p < 0 for p in ps):
                raise ValueError(f"node {i} has a parent that is not topologically earlier")
        if not self.order:
            object.__setattr__(self, "order", tuple(range(self.n)))

    @property
    def d(self) -> int:
        return max((len(ps) for ps in self.parents), default=0)

    @property
    def num_configurations(self) -> int:
        return sum(1 << len(ps) for ps in self.parents)

    def children(self, i: int) -> list[int]:
        return [j for j in range(self.n) if i in self.parents[j]]

    def configurations(self) -> Iterator[ParentalConfiguration]:
        for i, ps in enumerate(self.parents):
            for code in range(1 << len(ps)):
                yield ParentalConfiguration(i, code_to_assignment(code, len(ps)))

    def edges(self) -> list[tuple[int, int]]:
        """Directed edges (parent, child)."""
        return [(p, i) for i, ps in enumerate(self.parents) for p in ps]

    def skeleton(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(e) for e in self.edges())

    def v_structures(self) -> set[tuple[int, int, int]]:
        """Triples (i, j, k), i < j, with i -> k <- j and i, j non-adjacent."""
        skel = self.skeleton()
        out = set()
        for k, ps in enumerate(self.parents):
            for a in range(len(ps)):
                for b in range(a + 1, len(ps)):
                    i, j = ps[a], ps[b]
                    if frozenset((i, j)) not in skel:
                        out.add((i, j, k))
        return out

    def to_dict(self) -> dict:
        return {"parents": [list(ps) for ps in self.parents]}

    @classmethod
    def empty(cls, n: int) -> "DagStructure":
        return cls(n, tuple(() for _ in range(n)))

    @classmethod
    def from_edges(cls, n: int, edges) -> "DagStructure":
        """Orient undirected or directed edges from lower to higher index."""
        ps: list[set[int]] = [set() for _ in range(n)]
        for a, b in edges:
            lo, hi = min(a, b), max(a, b)
            if lo == hi:
                raise ValueError("self-loop")
            ps[hi].add(lo)
        return cls(n, tuple(tuple(sorted(p)) for p in ps))


def validate_structure(parents: Sequence[Sequence[int]]) -> DagStructure:
    """Check a parent-list DAG and return it in topological numbering.

    Raises :class:`ParentIndexOutOfRange` for a parent label outside ``[0, n)``
    (or a self-loop) and :class:`CycleDetected` if no topological order exists.
    """
    n = len(parents)
    for i, ps in enumerate(parents):
        for p in ps:
            if not (0 <= int(p) < n) or int(p) == i:
                raise ParentIndexOutOfRange(f"node {i} lists invalid parent {p}")

    if all(all(int(p) < i for p in ps) for i, ps in enumerate(parents)):
        return DagStructure(n, tuple(tuple(sorted({int(p) for p in ps})) for ps in parents))

    # Kahn's algorithm, smallest available label first so relabelling is stable
    indeg = [len(set(ps)) for ps in parents]
    children: list[list[int]] = [[] for _ in range(n)]
    for i, ps in enumerate(parents):
        for p in set(ps):
            children[int(p)].append(i)
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    order: list[int] = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
        ready.sort()
    if len(order) != n:
        raise CycleDetected("parent lists contain a directed cycle")

    new_label = {old: new for new, old in enumerate(order)}
    new_parents = tuple(
        tuple(sorted(new_label[int(p)] for p in set(parents[old]))) for old in order
    )
    return DagStructure(n, new_parents, tuple(order))
