"""Truncated realizations of the countably branching tree of finite sets.

A node is a strictly increasing tuple of positive integers; the empty tuple
is the root.  Children of a node append one element larger than the current
maximum, so the ancestor relation is "is a prefix of", and the graph metric
of the tree has the closed form

    d(J, K) = |J| + |K| - 2 * |lcp(J, K)|

since the unique path between two nodes climbs from J up to the longest
common prefix and then descends to K.

``TreeSpace(b, d)`` truncates the tree to finitely many nodes: increments are
bounded by ``b`` (children of J are J + (max(J)+k,) for k = 1..b, and (k,)
for the root) and levels are bounded by ``d``.  The node count is
sum(b**k for k in 0..d).  The distance formula itself is valid for arbitrary
strictly increasing tuples, truncated or not.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .errors import CapacityError

# Hard ceiling on how many nodes we are willing to materialize at once.
MAX_ENUMERATED_NODES = 2**21


@dataclass(frozen=True, order=True)
class TreeNode:
    """A tree vertex: a strictly increasing tuple of positive integers."""

    elements: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        elems = tuple(int(m) for m in self.elements)
        object.__setattr__(self, "elements", elems)
        prev = 0
        for m in elems:
            if m <= prev:
                raise ValueError(
                    f"elements must be strictly increasing positive integers: {elems!r}"
                )
            prev = m

    @property
    def level(self) -> int:
        return len(self.elements)

    @property
    def is_root(self) -> bool:
        return not self.elements

    def child(self, m: int) -> "TreeNode":
        return TreeNode(self.elements + (m,))

    def is_prefix_of(self, other: "TreeNode") -> bool:
        k = len(self.elements)
        return self.elements == other.elements[:k]

    def __str__(self) -> str:
        return "{" + ",".join(str(m) for m in self.elements) + "}"


ROOT = TreeNode()


def tree_parent(node: TreeNode) -> Optional[TreeNode]:
    """Drop the largest element; the root has no parent."""
    if node.is_root:
        return None
    return TreeNode(node.elements[:-1])


def tree_lcp(a: TreeNode, b: TreeNode) -> TreeNode:
    """Longest common prefix, i.e. the closest common ancestor."""
    n = 0
    for x, y in zip(a.elements, b.elements):
        if x != y:
            break
        n += 1
    return TreeNode(a.elements[:n])


def tree_distance(a: TreeNode, b: TreeNode) -> int:
    """Graph distance |a| + |b| - 2|lcp(a, b)|. Valid for any two nodes."""
    n = 0
    for x, y in zip(a.elements, b.elements):
        if x != y:
            break
        n += 1
    return len(a.elements) + len(b.elements) - 2 * n


@dataclass(frozen=True)
class TreeSpace:
    """The truncated tree T_{b,d}: increments in 1..b, levels at most d."""

    branching: int
    depth: int

    def __post_init__(self) -> None:
        if self.branching < 1:
            raise ValueError(f"branching must be >= 1, got {self.branching}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")

    def size(self) -> int:
        b, d = self.branching, self.depth
        if b == 1:
            return d + 1
        return (b ** (d + 1) - 1) // (b - 1)

    def __contains__(self, node: TreeNode) -> bool:
        if node.level > self.depth:
            return False
        prev = 0
        for m in node.elements:
            if not 1 <= m - prev <= self.branching:
                return False
            prev = m
        return True

    def children(self, node: TreeNode) -> list[TreeNode]:
        """Ordered children inside the space; empty at the depth bound."""
        if node.level >= self.depth:
            return []
        base = node.elements[-1] if node.elements else 0
        return [node.child(base + k) for k in range(1, self.branching + 1)]

    def nodes(self) -> tuple[TreeNode, ...]:
        """All nodes in lexicographic (depth-first preorder) order."""
        if self.size() > MAX_ENUMERATED_NODES:
            raise CapacityError(
                f"T_({self.branching},{self.depth}) has {self.size()} nodes, "
                f"above the enumeration cap of {MAX_ENUMERATED_NODES}"
            )
        return _enumerate_nodes(self.branching, self.depth)


def tree_children(node: TreeNode, space: TreeSpace) -> list[TreeNode]:
    return space.children(node)


@lru_cache(maxsize=64)
def _enumerate_nodes(b: int, d: int) -> tuple[TreeNode, ...]:
    space = TreeSpace(b, d)
    out: list[TreeNode] = []

    def walk(node: TreeNode) -> None:
        out.append(node)
        for c in space.children(node):
            walk(c)

    walk(ROOT)
    return tuple(out)


def to_json_vertices(space: TreeSpace) -> list[dict]:
    """JSON form: one record per node, lexicographic order."""
    return [
        {"elements": list(n.elements), "level": n.level} for n in space.nodes()
    ]
