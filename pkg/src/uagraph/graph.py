"""Bounded-degree uniform attachment graph: growth, balls, snapshots.

The process starts from a complete graph on m vertices. Each arriving vertex
draws m edges to distinct vertices chosen uniformly at random among vertices
of degree < d (the "open" vertices). Only d > 2m is supported; d = 2m behaves
differently and is rejected at construction.

Vertex ids are 1-based arrival indices: vertex s is the one that appeared at
time s.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field


class ModelViolationError(RuntimeError):
    """Raised when the growth process cannot continue (fewer than m open vertices)."""


class SnapshotFormatError(ValueError):
    """Raised for malformed or invariant-violating snapshot files."""


def _check_params(m: int, d: int) -> None:
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if d <= 2 * m:
        raise ValueError(
            f"degree cap d={d} with m={m} is out of scope: need d > 2m "
            f"(the boundary case d = 2m is excluded)"
        )


@dataclass
class Ball:
    """Closed ball in the graph metric around a vertex or a vertex set."""

    center: tuple[int, ...]
    radius: int
    vertices: frozenset[int]
    induced_edges: tuple[tuple[int, int], ...]
    # distance from the center set, per ball vertex
    depths: dict[int, int] = field(default_factory=dict)


class UAGraph:
    """Growing uniform attachment graph with degree cap d.

    Single-writer during growth; read-only queries (balls, censuses) are safe
    once growth is done. The open registry is a swap-remove array supporting
    O(1) uniform sampling.
    """

    def __init__(self, m: int, d: int):
        _check_params(m, d)
        self.m = m
        self.d = d
        self.n = m
        self.rng_seed: int | None = None
        # degrees[0] unused; vertices are 1-based
        self.degrees = [0] + [m - 1] * m
        # arrivals[i] = targets of vertex m+1+i, each a tuple of m older vertices
        self.arrivals: list[tuple[int, ...]] = []
        # open registry: scrambled array of open vertices (order carries no meaning)
        self._open = list(range(1, m + 1))
        self._open_cnt = m
        self._adj: list[list[int]] | None = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_arrivals(cls, m: int, d: int, arrivals: list[tuple[int, ...]],
                      rng_seed: int | None = None) -> "UAGraph":
        """Rebuild a graph from its arrival target lists, validating invariants."""
        g = cls(m, d)
        g.rng_seed = rng_seed
        for targets in arrivals:
            v = g.n + 1
            if len(targets) != m or len(set(targets)) != m:
                raise SnapshotFormatError(f"vertex {v}: expected {m} distinct targets")
            for t in targets:
                if not 1 <= t < v:
                    raise SnapshotFormatError(
                        f"vertex {v}: target {t} does not precede its arrival")
            g.arrivals.append(tuple(targets))
            g.degrees.append(m)
            for t in targets:
                g.degrees[t] += 1
                if g.degrees[t] > d:
                    raise SnapshotFormatError(
                        f"vertex {t} exceeds the degree cap {d}")
            g.n = v
        g._rebuild_open()
        return g

    def _rebuild_open(self) -> None:
        self._open = [v for v in range(1, self.n + 1) if self.degrees[v] < self.d]
        self._open_cnt = len(self._open)

    # -- queries -----------------------------------------------------------

    @property
    def open_registry(self) -> set[int]:
        return set(self._open[: self._open_cnt])

    def degree(self, v: int) -> int:
        return self.degrees[v]

    def num_edges(self) -> int:
        return self.m * (self.m - 1) // 2 + self.m * (self.n - self.m)

    def adjacency(self) -> list[list[int]]:
        """Neighbor lists in arrival order, built lazily from the arrival log."""
        if self._adj is None or len(self._adj) != self.n + 1:
            adj: list[list[int]] = [[] for _ in range(self.n + 1)]
            for i in range(1, self.m + 1):
                for j in range(i + 1, self.m + 1):
                    adj[i].append(j)
                    adj[j].append(i)
            for i, targets in enumerate(self.arrivals):
                v = self.m + 1 + i
                for t in targets:
                    adj[v].append(t)
                    adj[t].append(v)
            self._adj = adj
        return self._adj

    def neighbors(self, v: int) -> list[int]:
        if not 1 <= v <= self.n:
            raise ValueError(f"unknown vertex id {v}")
        return self.adjacency()[v]

    def edges(self):
        for i in range(1, self.m + 1):
            for j in range(i + 1, self.m + 1):
                yield (i, j)
        for i, targets in enumerate(self.arrivals):
            v = self.m + 1 + i
            for t in targets:
                yield (t, v)

    # -- growth ------------------------------------------------------------

    def grow(self, steps: int, rng_seed: int | None = None, *,
             rng: random.Random | None = None) -> "UAGraph":
        """Add `steps` vertices, each drawing m edges to a uniform m-subset
        of the open registry (rejection-free partial shuffle). Deterministic
        given rng_seed (Mersenne Twister via random.Random). Pass `rng` to
        continue an existing stream across growth segments."""
        if rng is None:
            if rng_seed is None:
                raise ValueError("grow needs rng_seed or rng")
            rng = random.Random(rng_seed)
            if self.rng_seed is None:
                self.rng_seed = rng_seed
        rnd = rng.random
        m, d = self.m, self.d
        deg = self.degrees
        ol = self._open
        cnt = self._open_cnt
        arrivals = self.arrivals
        v = self.n
        self._adj = None
        for _ in range(steps):
            if cnt < m:
                self.n = v
                self._open_cnt = cnt
                raise ModelViolationError(
                    f"fewer than m={m} open vertices at n={v}; process aborted")
            # partial Fisher-Yates over the registry: targets land in slots 0..m-1
            for t in range(m):
                j = t + int(rnd() * (cnt - t))
                ol[t], ol[j] = ol[j], ol[t]
            v += 1
            targets = tuple(ol[:m])
            arrivals.append(targets)
            # bump degrees; saturated targets are swap-removed from the front slots
            for t in range(m - 1, -1, -1):
                w = ol[t]
                dw = deg[w] + 1
                deg[w] = dw
                if dw == d:
                    cnt -= 1
                    ol[t] = ol[cnt]
            deg.append(m)
            if cnt == len(ol):
                ol.append(v)
            else:
                ol[cnt] = v
            cnt += 1
        self.n = v
        self._open_cnt = cnt
        return self

    # -- balls ---------------------------------------------------------------

    def ball(self, center, r: int) -> Ball:
        return ball(self, center, r)

    # -- integrity -----------------------------------------------------------

    def check_invariants(self) -> None:
        """Assert the structural invariants; cheap enough for tests/checkpoints."""
        m, d, n = self.m, self.d, self.n
        assert all(self.degrees[v] <= d for v in range(1, n + 1)), "degree cap violated"
        expected = 2 * self.num_edges()
        assert sum(self.degrees[1:]) == expected, "degree sum mismatch"
        nd = sum(1 for v in range(1, n + 1) if self.degrees[v] == d)
        assert nd * d <= 2 * m * n, "N_d(n) exceeds 2mn/d"
        assert self.open_registry == {
            v for v in range(1, n + 1) if self.degrees[v] < d
        }, "open registry out of sync"


def new_seed_graph(m: int, d: int) -> UAGraph:
    """Complete seed graph on m vertices; all degrees m-1, everything open."""
    return UAGraph(m, d)


def grow(graph: UAGraph, steps: int, rng_seed: int) -> UAGraph:
    return graph.grow(steps, rng_seed)


def ball(graph, center, r: int) -> Ball:
    """BFS-exact closed ball of radius r around a vertex or non-empty vertex set."""
    if isinstance(center, int):
        centers = (center,)
    else:
        centers = tuple(sorted(set(center)))
        if not centers:
            raise ValueError("ball center set is empty")
    n = graph.n
    for c in centers:
        if not 1 <= c <= n:
            raise ValueError(f"unknown vertex id {c}")
    if r < 0:
        raise ValueError("radius must be non-negative")
    depth = {c: 0 for c in centers}
    frontier = list(centers)
    for dist in range(1, r + 1):
        nxt = []
        for u in frontier:
            for w in graph.neighbors(u):
                if w not in depth:
                    depth[w] = dist
                    nxt.append(w)
        frontier = nxt
        if not frontier:
            break
    verts = frozenset(depth)
    edges = []
    for u in depth:
        for w in graph.neighbors(u):
            if u < w and w in depth:
                edges.append((u, w))
    edges.sort()
    return Ball(center=centers, radius=r, vertices=verts,
                induced_edges=tuple(edges), depths=depth)


# -- snapshots ---------------------------------------------------------------


def write_snapshot(graph: UAGraph, path) -> None:
    """Edge-list snapshot: header `ua m=<m> d=<d> n=<n> seed=<seed>`, then one
    line per arrival vertex v > m: `v: t_1 ... t_m`, ascending v."""
    seed = graph.rng_seed if graph.rng_seed is not None else "none"
    lines = [f"ua m={graph.m} d={graph.d} n={graph.n} seed={seed}\n"]
    for i, targets in enumerate(graph.arrivals):
        v = graph.m + 1 + i
        lines.append(f"{v}: {' '.join(str(t) for t in targets)}\n")
    with open(path, "w", encoding="utf-8") as fh:
        fh.writelines(lines)


def read_snapshot(path) -> UAGraph:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise SnapshotFormatError("empty snapshot file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "ua":
        raise SnapshotFormatError(f"malformed header: {lines[0]!r}")
    try:
        fields = dict(tok.split("=", 1) for tok in head[1:])
        m = int(fields["m"])
        d = int(fields["d"])
        n = int(fields["n"])
        seed = None if fields["seed"] == "none" else int(fields["seed"])
    except (KeyError, ValueError) as exc:
        raise SnapshotFormatError(f"malformed header: {lines[0]!r}") from exc
    _check_params(m, d)
    arrivals = []
    expect = m + 1
    for line in lines[1:]:
        if not line.strip():
            continue
        left, _, right = line.partition(":")
        try:
            v = int(left)
            targets = tuple(int(t) for t in right.split())
        except ValueError as exc:
            raise SnapshotFormatError(f"malformed arrival line: {line!r}") from exc
        if v != expect:
            raise SnapshotFormatError(
                f"arrival lines must be ascending: expected vertex {expect}, got {v}")
        arrivals.append(targets)
        expect += 1
    if len(arrivals) != n - m:
        raise SnapshotFormatError(
            f"header says n={n} but file lists {len(arrivals)} arrivals")
    g = UAGraph.from_arrivals(m, d, arrivals, rng_seed=seed)
    return g


# -- generic (non-UA) graphs for the game machinery ---------------------------


class SimpleGraph:
    """Plain undirected graph on [n] with the same query surface as UAGraph."""

    def __init__(self, n: int, edges):
        self.n = n
        adj: list[list[int]] = [[] for _ in range(n + 1)]
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise ValueError(f"edge ({u},{v}) outside [1,{n}]")
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        self._adj = adj
        self._edges = tuple(sorted(seen))

    def neighbors(self, v: int) -> list[int]:
        if not 1 <= v <= self.n:
            raise ValueError(f"unknown vertex id {v}")
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def adjacency(self) -> list[list[int]]:
        return self._adj

    def edges(self):
        return iter(self._edges)

    def ball(self, center, r: int) -> Ball:
        return ball(self, center, r)


def write_generic(graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"generic n={graph.n}\n")
        for u, v in sorted((min(e), max(e)) for e in graph.edges()):
            fh.write(f"{u} {v}\n")


def read_generic(path) -> SimpleGraph:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("generic "):
        raise SnapshotFormatError("not a generic edge-list file")
    try:
        n = int(lines[0].split("n=", 1)[1])
    except (IndexError, ValueError) as exc:
        raise SnapshotFormatError(f"malformed header: {lines[0]!r}") from exc
    edges = []
    for line in lines[1:]:
        if not line.strip():
            continue
        u, v = line.split()
        edges.append((int(u), int(v)))
    return SimpleGraph(n, edges)


def load_graph(path):
    """Dispatch on the header: UA snapshot or generic edge list."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if first.startswith("ua "):
        return read_snapshot(path)
    return read_generic(path)
