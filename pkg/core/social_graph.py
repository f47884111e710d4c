"""
Rooted-tree social graphs.

Agents are numbered 1..n in topological order: every descendant of a_j has a
smaller index than j and the root is a_n. Graphs given in another labeling are
re-indexed with from_labels(), which keeps the original labels for reporting.
"""

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np  # type: ignore

from core.constants import GraphKind
from core.exact_cake import Allocation, Piece
from core.exceptions import BadShapeParams, NotATree


@dataclass(frozen=True)
class GraphCheckReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Optional[str]:
        return self.violations[0] if self.violations else None

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


@dataclass(frozen=True)
class SocialGraph:
    """
    parent[j - 1] is p_j, or None for the root.

    Construction does not validate; call topological_check() or validated()
    before handing the graph to a protocol.
    """
    kind: GraphKind
    parent: tuple[Optional[int], ...]
    labels: tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'kind', GraphKind(self.kind))
        object.__setattr__(self, 'parent', tuple(self.parent))
        if not self.labels:
            object.__setattr__(self, 'labels', tuple(range(1, len(self.parent) + 1)))

    @classmethod
    def line(cls, n: int) -> "SocialGraph":
        return cls(GraphKind.LINE, tuple(j + 1 for j in range(1, n)) + (None,))

    @classmethod
    def star(cls, n: int) -> "SocialGraph":
        return cls(GraphKind.STAR, tuple(n for _ in range(1, n)) + (None,))

    @classmethod
    def from_labels(cls, kind: GraphKind, parent: list[Optional[int]]) -> "SocialGraph":
        """
        Re-index an arbitrarily labeled tree by DFS post-order.

        Args:
            kind: Graph kind
            parent: parent[label - 1] is the parent label, None for the root

        Returns:
            Graph in topological indexing whose labels map back to the input
        """
        n = len(parent)
        roots = [label for label in range(1, n + 1) if parent[label - 1] is None]
        if len(roots) != 1:
            raise NotATree(f"Expected exactly one root, found {len(roots)}")

        children: dict[int, list[int]] = {label: [] for label in range(1, n + 1)}
        for label in range(1, n + 1):
            p = parent[label - 1]
            if p is None:
                continue
            if not (isinstance(p, int) and 1 <= p <= n) or p == label:
                raise NotATree(f"Agent {label} has invalid parent {p!r}")
            children[p].append(label)

        order: list[int] = []
        stack = [(roots[0], False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            stack.append((node, True))
            for child in sorted(children[node], reverse=True):
                stack.append((child, False))

        if len(order) != n:
            raise NotATree(f"Only {len(order)} of {n} agents are reachable from the root")

        index_of = {label: i for i, label in enumerate(order, start=1)}
        internal_parent = tuple(
            None if parent[label - 1] is None else index_of[parent[label - 1]]
            for label in order
        )
        return cls(kind, internal_parent, tuple(order))

    def validated(self) -> "SocialGraph":
        report = topological_check(self)
        if not report.ok:
            raise NotATree(f"Invalid {self.kind.value} graph: {report.first}")
        return self

    @property
    def n(self) -> int:
        return len(self.parent)

    @property
    def root(self) -> int:
        return self.n

    def parent_of(self, j: int) -> Optional[int]:
        return self.parent[j - 1]

    @cached_property
    def _children(self) -> dict[int, tuple[int, ...]]:
        children: dict[int, list[int]] = {j: [] for j in range(1, self.n + 1)}
        for j, p in enumerate(self.parent, start=1):
            if p is not None and 1 <= p <= self.n:
                children[p].append(j)
        return {j: tuple(sorted(c)) for j, c in children.items()}

    def children(self, j: int) -> tuple[int, ...]:
        return self._children[j]

    @cached_property
    def _descendants(self) -> dict[int, frozenset[int]]:
        result = {}
        for j in range(1, self.n + 1):
            seen = {j}
            queue = deque([j])
            while queue:
                node = queue.popleft()
                for child in self._children[node]:
                    if child not in seen:
                        seen.add(child)
                        queue.append(child)
            result[j] = frozenset(seen)
        return result

    def descendants(self, j: int) -> frozenset[int]:
        """D_j, including j itself."""
        return self._descendants[j]

    def depth(self, j: int) -> int:
        depth = 0
        node = j
        while self.parent[node - 1] is not None:
            node = self.parent[node - 1]
            depth += 1
            if depth > self.n:
                raise NotATree(f"Parent chain of agent {j} contains a cycle")
        return depth

    def neighbors(self, j: int) -> tuple[int, ...]:
        p = self.parent_of(j)
        return tuple(sorted(self.children(j) + (() if p is None else (p,))))

    def edges(self) -> list[tuple[int, int]]:
        """(child, parent) pairs."""
        return [(j, p) for j, p in enumerate(self.parent, start=1) if p is not None]

    def inchild(self, k: int, j: int) -> tuple[int, ...]:
        """Children of a_j that are inactive with respect to k (index <= k)."""
        return tuple(i for i in self.children(j) if i <= k)

    def inact(self, k: int, j: int) -> frozenset[int]:
        indices = {j}
        for i in self.inchild(k, j):
            indices |= self.descendants(i)
        return frozenset(indices)

    def storage(self, k: int, j: int) -> frozenset[int]:
        """
        Bundle indices held in Storage(k, a_j).

        Only active agents (j > k) hold storage, which makes the storage sets
        a partition of 1..n.
        """
        if j <= k:
            return frozenset()
        return self.inact(k, j)


def topological_check(g: SocialGraph) -> GraphCheckReport:
    """Confirm structural, indexing and kind-specific invariants; never raises."""
    n = g.n
    if n < 1:
        return GraphCheckReport(("graph has no agents",))

    for j, p in enumerate(g.parent, start=1):
        if p is not None and not (isinstance(p, int) and 1 <= p <= n and p != j):
            return GraphCheckReport((f"agent {j} has invalid parent {p!r}",))

    roots = [j for j, p in enumerate(g.parent, start=1) if p is None]
    if len(roots) != 1:
        return GraphCheckReport((f"expected exactly one root, found {len(roots)}",))

    violations = []
    for j in range(1, n + 1):
        seen = {j}
        node = j
        while g.parent[node - 1] is not None:
            node = g.parent[node - 1]
            if node in seen:
                return GraphCheckReport((f"parent chain of agent {j} contains a cycle",))
            seen.add(node)

    if roots[0] != n:
        violations.append(f"root is agent {roots[0]}, expected agent {n}")
    for j, p in g.edges():
        if j >= p:
            violations.append(f"descendant index ≥ ancestor: agent {j} has parent {p}")
    if g.children(1):
        violations.append("agent 1 is not a leaf")

    if g.kind == GraphKind.LINE:
        for j in range(1, n):
            if g.parent_of(j) != j + 1:
                violations.append(f"line requires parent of agent {j} to be {j + 1}, got {g.parent_of(j)}")
                break
    elif g.kind in (GraphKind.DEPTH2, GraphKind.TWO_STAR, GraphKind.STAR):
        max_depth = 1 if g.kind == GraphKind.STAR else 2
        for j in range(1, n + 1):
            if g.depth(j) > max_depth:
                violations.append(f"{g.kind.value} requires depth ≤ {max_depth}, agent {j} has depth {g.depth(j)}")
                break
        if g.kind == GraphKind.TWO_STAR:
            for j in range(1, n):
                if len(g.neighbors(j)) > 2:
                    violations.append(f"2star requires degree ≤ 2 for non-root agents, agent {j} has degree {len(g.neighbors(j))}")
                    break

    return GraphCheckReport(tuple(violations))


@dataclass(frozen=True)
class StorageView:
    """
    Storage sets for the k-Fair conditions at level k (threshold k - 1).

    storage[j] holds bundle indices; bundles(j) resolves them against the
    bound allocation.
    """
    k: int
    threshold: int
    inchild: dict[int, tuple[int, ...]]
    inact: dict[int, frozenset[int]]
    storage: dict[int, frozenset[int]]
    allocation: Optional[Allocation] = None

    def bundles(self, j: int) -> list[Piece]:
        if self.allocation is None:
            raise ValueError("StorageView is not bound to an allocation")
        return [self.allocation.bundle(i) for i in sorted(self.storage[j])]

    def is_partition(self) -> bool:
        n = len(self.storage)
        covered: list[int] = []
        for indices in self.storage.values():
            covered.extend(indices)
        return sorted(covered) == list(range(1, n + 1))


def storage_sets(g: SocialGraph, k: int, b: Optional[Allocation] = None) -> StorageView:
    if not 1 <= k <= g.n:
        raise ValueError(f"Level k must lie in [1, {g.n}], got {k}")
    threshold = k - 1
    agents = range(1, g.n + 1)
    return StorageView(
        k=k,
        threshold=threshold,
        inchild={j: g.inchild(threshold, j) for j in agents},
        inact={j: g.inact(threshold, j) for j in agents},
        storage={j: g.storage(threshold, j) for j in agents},
        allocation=b,
    )


def monotone_inact_check(g: SocialGraph, j: int, k: int) -> bool:
    """Inact(k-1, a_j) ⊆ Inact(k, a_j)."""
    return g.inact(k - 1, j) <= g.inact(k, j)


def sample_graph(kind: GraphKind, n: int, rng: np.random.Generator) -> SocialGraph:
    """
    Draw a graph of the requested kind in topological indexing.

    Trees are random recursive trees grown from the root; Depth2Tree and
    TwoStar draw the number of root children first, then attach leaves.
    """
    kind = GraphKind(kind)
    if n < 2:
        raise BadShapeParams(f"Graphs need at least 2 agents, got {n}")

    if kind == GraphKind.LINE:
        return SocialGraph.line(n)
    if kind == GraphKind.STAR:
        return SocialGraph.star(n)

    parent: list[Optional[int]] = [None] * n
    if kind == GraphKind.TREE:
        for j in range(1, n):
            parent[j - 1] = int(rng.integers(j + 1, n + 1))
    else:
        if kind == GraphKind.TWO_STAR:
            # every child hosts at most one leaf, so at least ceil((n - 1) / 2) children
            child_count = int(rng.integers(n // 2, n))
        else:
            child_count = int(rng.integers(1, n))
        leaf_count = n - 1 - child_count
        children = list(range(n - child_count, n))
        for j in children:
            parent[j - 1] = n
        if kind == GraphKind.TWO_STAR:
            hosts = rng.choice(children, size=leaf_count, replace=False) if leaf_count else []
        else:
            hosts = rng.choice(children, size=leaf_count, replace=True) if leaf_count else []
        for leaf, host in zip(range(1, leaf_count + 1), hosts):
            parent[leaf - 1] = int(host)

    return SocialGraph(kind, tuple(parent)).validated()
