"""Recursive diamond-style graphs built from a branch-and-merge block.

The basic block has b+3 vertices: a root, a single middle vertex, b parallel
arm vertices, and a common sink, wired root -> mid -> each arm -> sink.  Its
diameter is 3.  The level-n graph is built by taking the block, stretching
every edge to length 3**(n-1), and replacing each stretched edge with a copy
of the level-(n-1) graph, gluing the copy's root to the edge's upper endpoint
and the copy's sink to the lower endpoint.  Copies meet only at those glue
points, so the whole graph is a series-parallel composition of blocks.

Vertices are addressed canonically as (word, pos): ``word`` lists, coarsest
scale first, which block edge the vertex lies on, and ``pos`` is a block
position at the finest scale the address reaches.  Glue vertices are shared
between copies and take the address of the coarsest scope that contains them
(so their word is short and their pos is a block position of that scope).
This makes equality plain tuple equality and gives every vertex a compact
printable id such as ``r``, ``v``, ``m2.w1``, ``t.v``.

Level (distance from the root) and the full metric are computed analytically
from addresses; ``distance_oracle`` runs BFS over the explicit adjacency and
is kept strictly independent so the two can be cross-checked pair by pair.

The down-degree of every vertex is 1 or b.  Branch vertices sit exactly at
the levels whose lowest nonzero base-3 digit is 1: at the finest scale these
are the mid vertices of blocks (level 1 mod 3), and at coarser scales the
glue vertices that root b parallel copies (levels 3**k * (3m+1)).
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

from .errors import CapacityError, RelationError

DEFAULT_MAX_N = 4
DEFAULT_MAX_B = 8
DEFAULT_MAX_VERTICES = 50_000
MAX_VERTICES_ENV = "LAAKSO_LAB_MAX_VERTICES"

ROOT_POS = 0
MID_POS = 1
# arm k (1-based) is position 1 + k; the sink is position b + 2.


def _sink_pos(b: int) -> int:
    return b + 2


def _is_arm(pos: int, b: int) -> bool:
    return 2 <= pos <= b + 1


def _pos_level(pos: int, b: int) -> int:
    if pos == ROOT_POS:
        return 0
    if pos == MID_POS:
        return 1
    if _is_arm(pos, b):
        return 2
    return 3


def _pos_label(pos: int, b: int) -> str:
    if pos == ROOT_POS:
        return "r"
    if pos == MID_POS:
        return "v"
    if _is_arm(pos, b):
        return f"w{pos - 1}"
    return "s"


# Block edges, indexed 0..2b: 0 is (root, mid), 1..b are (mid, arm k),
# b+1..2b are (arm k, sink).


def _edge_src(e: int, b: int) -> int:
    if e == 0:
        return ROOT_POS
    if e <= b:
        return MID_POS
    return 1 + (e - b)


def _edge_dst(e: int, b: int) -> int:
    if e == 0:
        return MID_POS
    if e <= b:
        return 1 + e
    return _sink_pos(b)


def _edge_label(e: int, b: int) -> str:
    if e == 0:
        return "t"
    if e <= b:
        return f"m{e}"
    return f"b{e - b}"


def _block_distance(p: int, q: int, b: int) -> int:
    if p == q:
        return 0
    if _is_arm(p, b) and _is_arm(q, b):
        return 2
    return abs(_pos_level(p, b) - _pos_level(q, b))


@dataclass(frozen=True, order=True)
class VertexId:
    """Canonical vertex address: block-edge word (coarse to fine) plus a
    block position at the scale where the address bottoms out."""

    word: tuple[int, ...]
    pos: int


def _level_of(word: tuple[int, ...], pos: int, n: int, b: int) -> int:
    lvl = 0
    scale = n
    for e in word:
        lvl += _pos_level(_edge_src(e, b), b) * 3 ** (scale - 1)
        scale -= 1
    return lvl + _pos_level(pos, b) * 3 ** (scale - 1)


def _vertex_label(v: VertexId, b: int) -> str:
    tokens = [_edge_label(e, b) for e in v.word]
    tokens.append(_pos_label(v.pos, b))
    return ".".join(tokens)


def expected_vertex_count(n: int, b: int) -> int:
    """V_1 = b+3 and V_{k+1} = (2b+1) (V_k - 2) + (b+3): each of the 2b+1
    block edges carries a copy sharing its two glue vertices with the
    b+3 skeleton vertices."""
    count = b + 3
    for _ in range(n - 1):
        count = (2 * b + 1) * (count - 2) + (b + 3)
    return count


def expected_edge_count(n: int, b: int) -> int:
    return (2 * b + 1) ** n


def _embed(e: int, v: VertexId, b: int) -> VertexId:
    # Glue vertices of the copy become block positions of the outer scope.
    if not v.word:
        if v.pos == ROOT_POS:
            return VertexId((), _edge_src(e, b))
        if v.pos == _sink_pos(b):
            return VertexId((), _edge_dst(e, b))
    return VertexId((e,) + v.word, v.pos)


def _build_edges(n: int, b: int) -> list[tuple[VertexId, VertexId]]:
    if n == 1:
        return [
            (VertexId((), _edge_src(e, b)), VertexId((), _edge_dst(e, b)))
            for e in range(2 * b + 1)
        ]
    inner = _build_edges(n - 1, b)
    out = []
    for e in range(2 * b + 1):
        for x, y in inner:
            out.append((_embed(e, x, b), _embed(e, y, b)))
    return out


class LaaksoGraph:
    """Explicit level-n graph: sorted vertex list, adjacency, analytic metric.

    Instances are immutable after construction; all queries are pure, so a
    graph can be shared freely across threads.
    """

    def __init__(self, n: int, b: int, max_vertices: Optional[int] = None):
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if b < 2:
            raise ValueError(f"b must be >= 2, got {b}")
        predicted = expected_vertex_count(n, b)
        cap = max_vertices
        if cap is None:
            env = os.environ.get(MAX_VERTICES_ENV)
            if env is not None:
                cap = int(env)
        if cap is None:
            if n > DEFAULT_MAX_N or b > DEFAULT_MAX_B:
                raise CapacityError(
                    f"n={n}, b={b} exceeds the default bounds n<={DEFAULT_MAX_N}, "
                    f"b<={DEFAULT_MAX_B}; set {MAX_VERTICES_ENV} or max_vertices to override"
                )
            cap = DEFAULT_MAX_VERTICES
        if predicted > cap:
            raise CapacityError(
                f"graph ({n}, {b}) needs {predicted} vertices, cap is {cap}"
            )

        self.n = n
        self.b = b
        edges = _build_edges(n, b)
        verts = {u for u, _ in edges} | {v for _, v in edges}
        self.vertices: tuple[VertexId, ...] = tuple(
            sorted(verts, key=lambda v: (_level_of(v.word, v.pos, n, b), v))
        )
        self._index: dict[VertexId, int] = {
            v: i for i, v in enumerate(self.vertices)
        }
        self.levels: tuple[int, ...] = tuple(
            _level_of(v.word, v.pos, n, b) for v in self.vertices
        )
        nbrs: list[set[int]] = [set() for _ in self.vertices]
        for u, v in edges:
            iu, iv = self._index[u], self._index[v]
            nbrs[iu].add(iv)
            nbrs[iv].add(iu)
        self.neighbors: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(s)) for s in nbrs
        )
        self.edge_count = len(edges)
        self.root: VertexId = self.vertices[0]
        self.sink: VertexId = self.vertices[-1]
        self._labels: dict[str, VertexId] = {
            _vertex_label(v, b): v for v in self.vertices
        }

    # -- basic queries ----------------------------------------------------

    def index(self, v: VertexId) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise KeyError(f"vertex {v!r} is not in this graph") from None

    def label(self, v: VertexId) -> str:
        self.index(v)
        return _vertex_label(v, self.b)

    def by_label(self, label: str) -> VertexId:
        try:
            return self._labels[label]
        except KeyError:
            raise KeyError(f"no vertex labeled {label!r}") from None

    def level(self, v: VertexId) -> int:
        return self.levels[self.index(v)]

    def children(self, v: VertexId) -> list[VertexId]:
        """Immediate descendants in fraternal (construction index) order."""
        i = self.index(v)
        lvl = self.levels[i]
        return [
            self.vertices[j] for j in self.neighbors[i] if self.levels[j] == lvl + 1
        ]

    def is_branching(self, v: VertexId) -> bool:
        return len(self.children(v)) > 1

    # -- metric ------------------------------------------------------------

    def distance(self, u: VertexId, v: VertexId) -> int:
        """Exact metric, computed from addresses by series-parallel descent."""
        self.index(u)
        self.index(v)
        return _dist(self.n, self.b, (u.word, u.pos), (v.word, v.pos))

    def distance_oracle(self, u: VertexId, v: VertexId) -> int:
        """Same metric by plain BFS over the adjacency. Kept independent of
        ``distance`` so the two implementations can check each other."""
        src, dst = self.index(u), self.index(v)
        if src == dst:
            return 0
        seen = {src: 0}
        queue = deque([src])
        while queue:
            i = queue.popleft()
            d = seen[i] + 1
            for j in self.neighbors[i]:
                if j not in seen:
                    if j == dst:
                        return d
                    seen[j] = d
                    queue.append(j)
        raise RelationError(f"{u!r} and {v!r} are not connected")

    def bfs_levels_from(self, v: VertexId) -> list[int]:
        """BFS distance from v to every vertex, indexed like ``vertices``."""
        src = self.index(v)
        dist = [-1] * len(self.vertices)
        dist[src] = 0
        queue = deque([src])
        while queue:
            i = queue.popleft()
            for j in self.neighbors[i]:
                if dist[j] < 0:
                    dist[j] = dist[i] + 1
                    queue.append(j)
        return dist

    def is_ancestor(self, u: VertexId, v: VertexId) -> bool:
        """True iff some shortest root-to-v path passes through u, which for
        this graded graph is d(u, v) == level(v) - level(u)."""
        lu, lv = self.level(u), self.level(v)
        return lu <= lv and self.distance(u, v) == lv - lu

    def downward_path(self, u: VertexId, v: VertexId) -> list[VertexId]:
        """A shortest u -> v path descending one level per step, taking the
        lowest fraternal index whenever several children stay above v."""
        if not self.is_ancestor(u, v):
            raise RelationError(
                f"{self.label(u)} is not an ancestor of {self.label(v)}"
            )
        path = [u]
        cur = u
        while cur != v:
            for c in self.children(cur):
                if self.is_ancestor(c, v):
                    cur = c
                    path.append(cur)
                    break
            else:
                raise AssertionError(
                    f"no child of {self.label(cur)} stays above {self.label(v)}"
                )
        return path

    # -- reports and exports -------------------------------------------------

    def branch_levels(self) -> set[int]:
        return {
            self.levels[i]
            for i, v in enumerate(self.vertices)
            if self.is_branching(v)
        }


def build_laakso(n: int, b: int, max_vertices: Optional[int] = None) -> LaaksoGraph:
    return LaaksoGraph(n, b, max_vertices=max_vertices)


def lowest_nonzero_base3_digit(m: int) -> int:
    while m % 3 == 0:
        m //= 3
    return m % 3


def branch_level_law(level: int, n: int) -> bool:
    """Branch vertices sit exactly at levels 3**k * (3m+1) below the top."""
    if level <= 0 or level >= 3**n:
        return False
    return lowest_nonzero_base3_digit(level) == 1


@lru_cache(maxsize=1 << 18)
def _dist(scale: int, b: int, u: tuple, v: tuple) -> int:
    if u == v:
        return 0
    if v < u:
        u, v = v, u
    wu, pu = u
    wv, pv = v
    unit = 3 ** (scale - 1)
    if not wu and not wv:
        return unit * _block_distance(pu, pv, b)
    # Same copy at this scale: strip the shared edge and recurse.
    if wu and wv and wu[0] == wv[0]:
        return _dist(scale - 1, b, (wu[1:], pu), (wv[1:], pv))
    # A glue vertex that bounds the other vertex's copy enters that copy
    # as the copy's root or sink.
    if not wu and wv:
        e = wv[0]
        if pu == _edge_src(e, b):
            return _dist(scale - 1, b, ((), ROOT_POS), (wv[1:], pv))
        if pu == _edge_dst(e, b):
            return _dist(scale - 1, b, ((), _sink_pos(b)), (wv[1:], pv))
    # Distinct copies: any path crosses copy boundaries at glue vertices,
    # so route through the four portal combinations.
    best = None
    for p, cp in _portals(scale, b, u):
        for q, cq in _portals(scale, b, v):
            cand = cp + unit * _block_distance(p, q, b) + cq
            if best is None or cand < best:
                best = cand
    return best


def _portals(scale: int, b: int, u: tuple) -> list[tuple[int, int]]:
    word, pos = u
    if not word:
        return [(pos, 0)]
    e = word[0]
    inner_level = _level_of(word[1:], pos, scale - 1, b)
    return [
        (_edge_src(e, b), inner_level),
        (_edge_dst(e, b), 3 ** (scale - 1) - inner_level),
    ]


# -- structure verification ---------------------------------------------------


def structure_report(g: LaaksoGraph) -> dict:
    """Counts, diameter, level grading, and the branch-level law, all checked
    against first principles (recurrence, BFS, down-degrees)."""
    problems: list[str] = []
    vcount = len(g.vertices)
    expected_v = expected_vertex_count(g.n, g.b)
    if vcount != expected_v:
        problems.append(f"vertex count {vcount} != recurrence value {expected_v}")
    expected_e = expected_edge_count(g.n, g.b)
    if g.edge_count != expected_e:
        problems.append(f"edge count {g.edge_count} != (2b+1)^n = {expected_e}")

    bfs = g.bfs_levels_from(g.root)
    if list(g.levels) != bfs:
        problems.append("analytic levels disagree with BFS from the root")

    top = 3**g.n
    if max(g.levels) != top:
        problems.append(f"maximal level {max(g.levels)} != 3^n = {top}")
    if sum(1 for l in g.levels if l == top) != 1:
        problems.append("maximal level attained more than once")

    # Diameter over all pairs, and uniqueness of the extremal pair.
    diameter = 0
    extremal = 0
    verts = g.vertices
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            d = g.distance(verts[i], verts[j])
            if d > diameter:
                diameter, extremal = d, 1
            elif d == diameter:
                extremal += 1
    if diameter != top:
        problems.append(f"diameter {diameter} != 3^n = {top}")
    elif extremal != 1:
        problems.append(f"diameter attained by {extremal} pairs, expected 1")

    down_degrees_ok = True
    law_ok = True
    for v in verts:
        kids = g.children(v)
        lvl = g.level(v)
        if lvl < top and len(kids) not in (1, g.b):
            down_degrees_ok = False
            problems.append(
                f"vertex {g.label(v)} has down-degree {len(kids)}"
            )
        if (len(kids) > 1) != branch_level_law(lvl, g.n):
            law_ok = False
            problems.append(
                f"vertex {g.label(v)} at level {lvl}: branching={len(kids) > 1} "
                f"violates the base-3 branch-level law"
            )

    return {
        "n": g.n,
        "b": g.b,
        "vertex_count": vcount,
        "expected_vertex_count": expected_v,
        "edge_count": g.edge_count,
        "expected_edge_count": expected_e,
        "diameter": diameter,
        "expected_diameter": top,
        "levels_match_bfs": list(g.levels) == bfs,
        "down_degrees_ok": down_degrees_ok,
        "branch_level_law_ok": law_ok,
        "problems": problems,
        "pass": not problems,
    }


def oracle_agreement_report(g: LaaksoGraph) -> dict:
    """Compare the analytic metric with per-source BFS on every pair."""
    verts = g.vertices
    mismatches = []
    for i, u in enumerate(verts):
        bfs = g.bfs_levels_from(u)
        for j in range(i + 1, len(verts)):
            a = g.distance(u, verts[j])
            if a != bfs[j]:
                mismatches.append(
                    {"u": g.label(u), "v": g.label(verts[j]),
                     "analytic": a, "bfs": bfs[j]}
                )
    total = len(verts) * (len(verts) - 1) // 2
    return {
        "n": g.n,
        "b": g.b,
        "pairs_checked": total,
        "mismatches": mismatches[:10],
        "mismatch_count": len(mismatches),
        "pass": not mismatches,
    }


# -- forks ---------------------------------------------------------------------


def find_forks(
    g: LaaksoGraph, r_min: int = 1, r_max: Optional[int] = None
) -> Iterator[tuple[int, VertexId, VertexId, list[VertexId]]]:
    """Yield (r, head, center, arms): center is r below head, each arm is r
    below center, and distinct arms are mutually 2r apart.  Deterministic
    order: increasing r, then center, then head."""
    if r_max is None:
        r_max = 3**g.n
    levels = g.levels
    verts = g.vertices
    for r in range(r_min, r_max + 1):
        for ci, center in enumerate(verts):
            if not g.is_branching(center):
                continue
            arms = []
            for j, cand in enumerate(verts):
                if levels[j] != levels[ci] + r:
                    continue
                if not g.is_ancestor(center, cand):
                    continue
                if all(g.distance(cand, a) == 2 * r for a in arms):
                    arms.append(cand)
            if len(arms) < 2:
                continue
            for hi, head in enumerate(verts):
                if levels[hi] != levels[ci] - r:
                    continue
                if g.is_ancestor(head, center):
                    yield (r, head, center, arms)


# -- exports -------------------------------------------------------------------


def to_json_dict(g: LaaksoGraph) -> dict:
    """Deterministic JSON form: vertices sorted by (level, address), each
    edge listed once with endpoint ids in sorted order."""
    vertices = [
        {"id": g.label(v), "level": g.level(v)} for v in g.vertices
    ]
    edges = []
    for i, v in enumerate(g.vertices):
        li = g.label(v)
        for j in g.neighbors[i]:
            if j > i:
                edges.append([li, g.label(g.vertices[j])])
    return {
        "schema": 1,
        "n": g.n,
        "b": g.b,
        "vertices": vertices,
        "edges": edges,
    }


def to_dot(g: LaaksoGraph) -> str:
    """Graphviz form with one node per vertex labeled "level:address"."""
    lines = [f"graph laakso_n{g.n}_b{g.b} {{"]
    for v in g.vertices:
        lines.append(f'  "{g.label(v)}" [label="{g.level(v)}:{g.label(v)}"];')
    for i, v in enumerate(g.vertices):
        for j in g.neighbors[i]:
            if j > i:
                lines.append(f'  "{g.label(v)}" -- "{g.label(g.vertices[j])}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
