"""Cycle enumeration, unicyclic ball classification, and structural checks.

Short cycles are enumerated exactly by rooted DFS with pruning: paths start
at the smallest cycle vertex, intermediates must be larger, and each cycle is
reported once in a canonical direction. A maximal unicyclic subgraph of
depth k around a cycle C is operationalized as the radius-k ball B_k(C); the
ball is classified when it contains exactly one cycle (edges = vertices on a
connected ball), with the type code the lexicographic minimum over the 2*ell
dihedral symmetries of the per-cycle-vertex hanging tree codes. A type is
complete when every non-leaf vertex of the ball has graph degree d; once
complete, later growth can only touch boundary leaves, so the type freezes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import ball
from .trees import canonical, code_string


@dataclass(frozen=True)
class CycleRecord:
    vertices: tuple[int, ...]   # canonical rotation: starts at min vertex
    length: int
    min_vertex: int


@dataclass(frozen=True)
class UnicyclicType:
    cycle_length: int
    depth: int
    code: str
    complete: bool


@dataclass
class UnicyclicCensus:
    n: int
    ell: int
    depth: int
    counts: dict[str, int]
    complete_count: int
    multicyclic_balls: int
    types: dict[str, UnicyclicType] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.multicyclic_balls

    def noncomplete_vector(self) -> dict[str, int]:
        return {c: k for c, k in self.counts.items() if not self.types[c].complete}


def find_cycles(graph, max_len: int) -> list[CycleRecord]:
    """Every simple cycle of length <= max_len, each reported once.

    DFS from each vertex v in increasing order; path vertices beyond v must
    exceed v, and the closing neighbor's successor direction is fixed by
    requiring path[1] < path[-1]. Cost O(n d^(max_len-1)) with degree cap d.
    """
    if max_len < 3:
        raise ValueError("max_len must be >= 3")
    out = []
    adj = [sorted(graph.neighbors(v)) for v in range(1, graph.n + 1)]
    adj.insert(0, [])
    for v in range(1, graph.n + 1):
        stack = [(v, [v])]
        while stack:
            u, path = stack.pop()
            for w in adj[u]:
                if w == v and len(path) >= 3 and path[1] < path[-1]:
                    out.append(CycleRecord(vertices=tuple(path),
                                           length=len(path), min_vertex=v))
                elif w > v and w not in path and len(path) < max_len:
                    stack.append((w, path + [w]))
    out.sort(key=lambda c: (c.length, c.vertices))
    return out


def triangles_from_arrivals(graph) -> list[tuple[int, int, int]]:
    """Exact triangle list (apex, a, b) for a grown graph, straight from the
    arrival log: the youngest vertex of any triangle drew both its edges."""
    m = graph.m
    tris = []
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            for k in range(j + 1, m + 1):
                tris.append((k, i, j))
    tris = [(max(t), min(t), sorted(t)[1]) for t in tris]
    arrivals = graph.arrivals
    for idx, targets in enumerate(arrivals):
        v = m + 1 + idx
        for x in range(m):
            for y in range(x + 1, m):
                a, b = targets[x], targets[y]
                lo, hi = (a, b) if a < b else (b, a)
                if hi <= m or lo in arrivals[hi - m - 1]:
                    tris.append((v, lo, hi))
    tris.sort()
    return tris


def _hanging_codes(graph, ball_obj, cycle: tuple[int, ...]) -> list[str]:
    """Per-cycle-vertex hanging tree codes within an acyclic-forest ball."""
    depths = ball_obj.depths
    members = ball_obj.vertices

    def build(v, parent_depth) -> tuple:
        kids = []
        for w in graph.neighbors(v):
            if w in members and depths[w] == depths[v] + 1:
                kids.append(build(w, depths[v]))
        return canonical(tuple(kids))

    return [code_string(build(c, -1)) for c in cycle]


def unicyclic_code(cycle_length: int, depth: int, hang: list[str]) -> str:
    """Lexicographic minimum over the dihedral symmetries of the cycle."""
    seqs = []
    ell = cycle_length
    for base in (hang, hang[::-1]):
        for r in range(ell):
            seqs.append(tuple(base[r:] + base[:r]))
    best = min(seqs)
    return f"U{ell}.{depth}[" + "|".join(best) + "]"


def classify_cycle_ball(graph, cycle: tuple[int, ...], k: int,
                        d: int) -> UnicyclicType | None:
    """Type of the radius-k ball around the cycle, or None when the ball
    contains more than one cycle."""
    b = ball(graph, set(cycle), k)
    nv = len(b.vertices)
    ne = len(b.induced_edges)
    if ne != nv:  # connected ball: cyclomatic number = ne - nv + 1
        return None
    hang = _hanging_codes(graph, b, cycle)
    # non-leaf vertices of the ball must be saturated for a complete type
    sub_deg = {v: 0 for v in b.vertices}
    for u, w in b.induced_edges:
        sub_deg[u] += 1
        sub_deg[w] += 1
    complete = all(len(graph.neighbors(v)) == d
                   for v in b.vertices if sub_deg[v] >= 2)
    # at k = 0 the cycle degrees are invisible in the structure, so the
    # complete marker is part of the type identity
    code = unicyclic_code(len(cycle), k, hang) + ("*" if complete else "")
    return UnicyclicType(cycle_length=len(cycle), depth=k, code=code,
                         complete=complete)


def census_unicyclic(graph, ell: int, k: int, d: int | None = None) -> UnicyclicCensus:
    """Classify every ell-cycle by the type of its radius-k ball."""
    if ell < 3 or k < 0:
        raise ValueError("need ell >= 3 and k >= 0")
    if d is None:
        d = getattr(graph, "d", None)
        if d is None:
            raise ValueError("pass d explicitly for generic graphs")
    counts: dict[str, int] = {}
    types: dict[str, UnicyclicType] = {}
    complete_count = 0
    multi = 0
    for rec in find_cycles(graph, ell):
        if rec.length != ell:
            continue
        t = classify_cycle_ball(graph, rec.vertices, k, d)
        if t is None:
            multi += 1
            continue
        counts[t.code] = counts.get(t.code, 0) + 1
        types.setdefault(t.code, t)
        if t.complete:
            complete_count += 1
    return UnicyclicCensus(n=graph.n, ell=ell, depth=k, counts=counts,
                           complete_count=complete_count,
                           multicyclic_balls=multi, types=types)


def check_no_multicyclic(graph, size_cap: int, prefix_s: int = 0):
    """True iff no connected subgraph on <= size_cap vertices avoiding
    [prefix_s] has two independent cycles; returns (verdict, witness)."""
    if size_cap < 4:
        raise ValueError("size_cap must be >= 4")
    cycles = [c for c in find_cycles(graph, size_cap)
              if c.min_vertex > prefix_s]
    for i in range(len(cycles)):
        vi = set(cycles[i].vertices)
        for j in range(i + 1, len(cycles)):
            vj = set(cycles[j].vertices)
            union = vi | vj
            if vi & vj:
                if len(union) <= size_cap:
                    return False, tuple(sorted(union))
                continue
            dist, path = _set_distance_with_path(graph, vi, vj, prefix_s)
            if dist is None:
                continue
            total = len(union) + max(0, dist - 1)
            if total <= size_cap:
                return False, tuple(sorted(union | set(path)))
    return True, None


def _set_distance_with_path(graph, src: set[int], dst: set[int], prefix_s: int):
    """BFS distance between vertex sets through vertices outside [prefix_s];
    returns (distance, interior path vertices)."""
    parent = {v: None for v in src}
    frontier = list(src)
    dist = 0
    while frontier:
        dist += 1
        nxt = []
        for u in frontier:
            for w in graph.neighbors(u):
                if w in dst:
                    path = []
                    x = u
                    while x is not None and x not in src:
                        path.append(x)
                        x = parent[x]
                    return dist, path
                if w not in parent and w > prefix_s:
                    parent[w] = u
                    nxt.append(w)
        frontier = nxt
    return None, None


def distance_profile(graph, *vertex_sets) -> np.ndarray:
    """Exact pairwise BFS distances between vertex sets (inf if disconnected)."""
    sets = [set(s) if not isinstance(s, int) else {s} for s in vertex_sets]
    for s in sets:
        if not s:
            raise ValueError("empty vertex set")
        for v in s:
            if not 1 <= v <= graph.n:
                raise ValueError(f"unknown vertex id {v}")
    k = len(sets)
    out = np.zeros((k, k))
    for i, s in enumerate(sets):
        dist = _bfs_distances(graph, s)
        for j in range(k):
            if i == j:
                continue
            dj = min((dist.get(v, np.inf) for v in sets[j]), default=np.inf)
            out[i, j] = dj
    return np.minimum(out, out.T)


def _bfs_distances(graph, sources: set[int]) -> dict[int, int]:
    dist = {v: 0 for v in sources}
    frontier = list(sources)
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for w in graph.neighbors(u):
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


def set_distance(graph, a, b) -> float:
    prof = distance_profile(graph, a, b)
    return float(prof[0, 1])
