"""Regular vine tree sequences.

An edge of tree ``m`` is stored as its conditioned pair and conditioning
set ``(j, k; D)`` with ``|D| = m - 1``.  The nodes of tree ``m`` are the
edges of tree ``m - 1``; we identify a node by the complete union
``{j, k} | D`` of the edge it stands for (for tree 1, the singleton
variable).  Variables are 0-based.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Hashable, Iterable, Sequence

from .errors import ConfigError, DomainError, StructureError

__all__ = [
    "VineEdge",
    "RVineStructure",
    "ValidationReport",
    "Candidate",
    "validate",
    "max_spanning_tree",
    "allowed_pairs",
    "dvine",
]


@dataclass(frozen=True, order=True)
class VineEdge:
    """Edge ``(j, k; D)``; the conditioned pair is kept sorted."""

    conditioned: tuple[int, int]
    conditioning: tuple[int, ...] = ()

    def __post_init__(self):
        a, b = (int(x) for x in self.conditioned)
        if a == b:
            raise DomainError(f"conditioned pair must have distinct variables, got ({a}, {b})")
        cond = tuple(sorted(int(x) for x in self.conditioning))
        if len(set(cond)) != len(cond):
            raise DomainError(f"conditioning set has duplicates: {cond}")
        if a in cond or b in cond:
            raise DomainError(f"conditioned variables {a}, {b} appear in the conditioning set {cond}")
        object.__setattr__(self, "conditioned", (min(a, b), max(a, b)))
        object.__setattr__(self, "conditioning", cond)

    @property
    def tree_level(self) -> int:
        return len(self.conditioning) + 1

    @property
    def union(self) -> frozenset[int]:
        return frozenset(self.conditioned) | frozenset(self.conditioning)

    @property
    def endpoints(self) -> tuple[frozenset[int], frozenset[int]]:
        """Complete unions of the two tree ``m - 1`` nodes the edge joins."""
        d = frozenset(self.conditioning)
        return d | {self.conditioned[0]}, d | {self.conditioned[1]}

    def __str__(self) -> str:
        a, b = self.conditioned
        if not self.conditioning:
            return f"{a},{b}"
        return f"{a},{b};{','.join(map(str, self.conditioning))}"


@dataclass(frozen=True)
class RVineStructure:
    """A (possibly partial) regular vine tree sequence on ``d`` variables.

    ``trees[m - 1]`` holds the edges of tree ``m``.  A structure with fewer
    than ``d - 1`` trees is a partial sequence, as built during selection.
    """

    d: int
    trees: tuple[tuple[VineEdge, ...], ...] = ()
    _by_union: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.d) < 2:
            raise DomainError(f"dimension must be at least 2, got {self.d}")
        object.__setattr__(self, "d", int(self.d))
        trees = tuple(tuple(t) for t in self.trees)
        object.__setattr__(self, "trees", trees)
        lookup = {}
        for level, tree in enumerate(trees, start=1):
            for e in tree:
                lookup[(level, e.union)] = e
        object.__setattr__(self, "_by_union", lookup)

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @property
    def is_complete(self) -> bool:
        return self.n_trees == self.d - 1

    def edges(self, level: int) -> tuple[VineEdge, ...]:
        return self.trees[level - 1]

    def all_edges(self) -> Iterable[VineEdge]:
        for tree in self.trees:
            yield from tree

    def nodes(self, level: int) -> tuple[frozenset[int], ...]:
        """Node identifiers (complete unions) of tree ``level``."""
        if level == 1:
            return tuple(frozenset({i}) for i in range(self.d))
        return tuple(e.union for e in self.trees[level - 2])

    def edge_by_union(self, level: int, union: frozenset[int]) -> VineEdge | None:
        return self._by_union.get((level, frozenset(union)))

    def parents(self, edge: VineEdge) -> tuple[VineEdge | None, VineEdge | None]:
        """Tree ``m - 1`` edges an edge joins (``None`` in tree 1)."""
        m = edge.tree_level
        if m == 1:
            return None, None
        lo, hi = edge.endpoints
        return self.edge_by_union(m - 1, lo), self.edge_by_union(m - 1, hi)

    def truncated(self, levels: int) -> "RVineStructure":
        return RVineStructure(self.d, self.trees[:levels])

    def with_tree(self, edges: Sequence[VineEdge]) -> "RVineStructure":
        return RVineStructure(self.d, self.trees + (tuple(edges),))

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "trees": [
                [[list(e.conditioned), list(e.conditioning)] for e in tree] for tree in self.trees
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RVineStructure":
        try:
            trees = tuple(
                tuple(VineEdge(tuple(c), tuple(cond)) for c, cond in tree) for tree in data["trees"]
            )
            return cls(int(data["d"]), trees)
        except (KeyError, TypeError, ValueError) as exc:
            raise StructureError(f"malformed structure description: {exc}") from exc

    def __str__(self) -> str:
        lines = [f"RVineStructure(d={self.d})"]
        for m, tree in enumerate(self.trees, start=1):
            lines.append(f"  T{m}: " + "  ".join(str(e) for e in tree))
        return "\n".join(lines)


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.valid


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        self.parent[ri] = rj
        return True


def validate(structure: RVineStructure) -> ValidationReport:
    """Check edge counts, the spanning-tree property and the proximity condition.

    Every violation found is listed; the check does not stop at the first.
    """
    d = structure.d
    problems: list[str] = []
    if structure.n_trees > d - 1:
        problems.append(f"{structure.n_trees} trees given, at most d - 1 = {d - 1} allowed")
    prev_edges: tuple[VineEdge, ...] = ()
    for m, tree in enumerate(structure.trees[: d - 1], start=1):
        if len(tree) != d - m:
            problems.append(f"tree {m} has {len(tree)} edges, expected {d - m}")
        nodes = structure.nodes(m)
        index = {u: i for i, u in enumerate(nodes)}
        if len(index) != len(nodes):
            problems.append(f"tree {m - 1} has edges with identical complete unions")
        forest = _UnionFind(len(nodes))
        seen = set()
        for e in tree:
            if e.tree_level != m:
                problems.append(f"edge ({e}) in tree {m} has {len(e.conditioning)} conditioning variables")
                continue
            if any(not 0 <= x < d for x in e.union):
                problems.append(f"edge ({e}) in tree {m} refers to a variable outside 0..{d - 1}")
                continue
            if e in seen:
                problems.append(f"edge ({e}) appears twice in tree {m}")
                continue
            seen.add(e)
            lo, hi = e.endpoints
            if lo not in index or hi not in index:
                missing = [str(sorted(x)) for x in (lo, hi) if x not in index]
                problems.append(
                    f"edge ({e}) in tree {m} joins nodes not present in that tree: {', '.join(missing)}"
                )
                continue
            if m > 1:
                p_lo, p_hi = prev_edges[index[lo]], prev_edges[index[hi]]
                if not set(p_lo.endpoints) & set(p_hi.endpoints):
                    problems.append(
                        f"edge ({e}) in tree {m} violates proximity: ({p_lo}) and ({p_hi}) share no node"
                    )
            if not forest.union(index[lo], index[hi]):
                problems.append(f"edge ({e}) closes a cycle in tree {m}")
        prev_edges = tree
    return ValidationReport(not problems, tuple(problems))


def max_spanning_tree(
    pairs: Iterable[tuple[Hashable, Hashable, float]], nodes: Sequence[Hashable]
) -> list[tuple[Hashable, Hashable]]:
    """Maximum-weight spanning tree by Prim's algorithm.

    Ties are broken by the positions of the endpoints in ``nodes``
    (lexicographically smallest pair first), so the result is fully
    deterministic.  Edges are returned as ``(a, b)`` with ``a`` before
    ``b`` in ``nodes``, in the order they were added.
    """
    nodes = list(nodes)
    pos = {u: i for i, u in enumerate(nodes)}
    if len(pos) != len(nodes):
        raise StructureError("duplicate node labels")
    n = len(nodes)
    if n == 0:
        return []
    adj: list[list[tuple[float, int, int]]] = [[] for _ in range(n)]
    seen = set()
    for a, b, w in pairs:
        if a not in pos or b not in pos:
            raise StructureError(f"pair ({a!r}, {b!r}) refers to an unknown node")
        i, j = sorted((pos[a], pos[b]))
        if i == j:
            raise StructureError(f"self-loop at node {a!r}")
        if (i, j) in seen:
            raise StructureError(f"duplicate pair ({a!r}, {b!r})")
        w = float(w)
        if not math.isfinite(w) or not 0.0 <= w <= 1.0:
            raise DomainError(f"weight {w} for ({a!r}, {b!r}) outside [0, 1]")
        seen.add((i, j))
        adj[i].append((-w, i, j))
        adj[j].append((-w, i, j))

    in_tree = [False] * n
    in_tree[0] = True
    heap = list(adj[0])
    heapq.heapify(heap)
    out: list[tuple[Hashable, Hashable]] = []
    while heap and len(out) < n - 1:
        _, i, j = heapq.heappop(heap)
        if in_tree[i] and in_tree[j]:
            continue
        new = j if in_tree[i] else i
        in_tree[new] = True
        out.append((nodes[i], nodes[j]))
        for item in adj[new]:
            other = item[2] if item[1] == new else item[1]
            if not in_tree[other]:
                heapq.heappush(heap, item)
    if len(out) != n - 1:
        raise StructureError(f"pair list does not connect all {n} nodes")
    return out


@dataclass(frozen=True)
class Candidate:
    """An admissible pair of nodes for the next tree.

    ``left`` and ``right`` index the nodes of the tree being built (the
    variables for tree 1, the previous tree's edges otherwise).
    """

    left: int
    right: int
    edge: VineEdge


def allowed_pairs(structure: RVineStructure, level: int) -> list[Candidate]:
    """All node pairs of tree ``level`` allowed by the proximity condition."""
    d = structure.d
    if not 1 <= level <= d - 1:
        raise ConfigError(f"tree level {level} outside 1..{d - 1}")
    if structure.n_trees < level - 1:
        raise ConfigError(f"tree level {level} needs trees 1..{level - 1}, only {structure.n_trees} fixed")
    if level == 1:
        return [Candidate(i, j, VineEdge((i, j))) for i, j in combinations(range(d), 2)]
    prev = structure.edges(level - 1)
    out = []
    for i, j in combinations(range(len(prev)), 2):
        a, b = prev[i], prev[j]
        if not set(a.endpoints) & set(b.endpoints):
            continue
        ua, ub = a.union, b.union
        conditioned = tuple(sorted(ua ^ ub))
        out.append(Candidate(i, j, VineEdge(conditioned, tuple(sorted(ua & ub)))))
    return out


def dvine(d: int, order: Sequence[int] | None = None) -> RVineStructure:
    """D-vine (path) structure along ``order`` (natural order by default)."""
    order = list(range(d)) if order is None else [int(x) for x in order]
    if sorted(order) != list(range(d)):
        raise DomainError("order must be a permutation of 0..d-1")
    trees = []
    for m in range(1, d):
        trees.append(
            tuple(VineEdge((order[i], order[i + m]), tuple(order[i + 1 : i + m])) for i in range(d - m))
        )
    return RVineStructure(d, tuple(trees))
