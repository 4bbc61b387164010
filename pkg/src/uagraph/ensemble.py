"""Lockstep vectorized growth of many independent graph replicas.

All replicas advance one arrival per step with their registries stored in
numpy arrays, so the per-step cost is a fixed number of vectorized ops
regardless of replica count. Replicas are processed in chunks of fixed size;
chunk c of a run draws from PCG64 seeded with SeedSequence([seed, c]), and
replicas within a chunk share the lockstep stream, so a run is reproducible
given (seed, replicas, chunk_size).

The engine records what the large Monte Carlo experiments need: degree
censuses at checkpoints, triangle creation events (the last edge of a
triangle is always drawn by the arriving vertex, so pair-adjacency tests at
arrival catch every one), degree snapshots of triangle vertices at
checkpoints, and the final local adjacency around triangles for radius-k
ball classification. Edges are never deleted, so the induced subgraph on
[n] at the end equals the graph at time n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .graph import ModelViolationError

DEFAULT_CHUNK = 1024


@dataclass
class TriangleData:
    """Per-replica triangle record.

    triangles: (v, a, b) with a, b the adjacent pair targeted by arrival v,
    ascending in v. checkpoint_degrees[n] holds the degrees at time n of the
    cycle vertices (v, a, b) for triangles with v <= n. neighbors holds the
    final neighbor lists of every vertex within `phases` hops of a triangle.
    """

    triangles: list[tuple[int, int, int]]
    checkpoint_degrees: dict[int, np.ndarray]
    neighbors: dict[int, np.ndarray] = field(default_factory=dict)

    def count_at(self, n: int) -> int:
        return sum(1 for (v, _, _) in self.triangles if v <= n)

    def neighbors_at(self, v: int, n: int) -> list[int]:
        return [int(w) for w in self.neighbors[v] if w <= n]


@dataclass
class EnsembleResult:
    m: int
    d: int
    n_final: int
    replicas: int
    seed: int
    chunk_size: int
    checkpoints: list[int]
    degree_censuses: dict[int, np.ndarray]        # n -> (replicas, d+1) counts
    triangles: list[TriangleData] | None = None
    arrivals: np.ndarray | None = None            # (replicas, n_final+1, m)


def grow_ensemble(m: int, d: int, n_final: int, replicas: int, seed: int = 0,
                  checkpoints=(), track_triangles: bool = False,
                  phases: int = 2, record_arrivals: bool = False,
                  chunk_size: int = DEFAULT_CHUNK) -> EnsembleResult:
    """Grow `replicas` independent G(m, d) processes to n_final in lockstep."""
    if d <= 2 * m:
        raise ValueError(f"need d > 2m, got m={m}, d={d}")
    if n_final < m or replicas < 1:
        raise ValueError("need n_final >= m and replicas >= 1")
    checkpoints = sorted(set(int(c) for c in checkpoints) | {n_final})
    if checkpoints[0] < m:
        raise ValueError("checkpoints must be >= m")
    need_adj = track_triangles or record_arrivals

    censuses = {n: np.zeros((replicas, d + 1), dtype=np.int64) for n in checkpoints}
    tri_all: list[TriangleData] | None = [] if track_triangles else None
    arr_all: list[np.ndarray] = []

    for chunk_index, start in enumerate(range(0, replicas, chunk_size)):
        r_chunk = min(chunk_size, replicas - start)
        rng = np.random.default_rng(np.random.SeedSequence([seed, chunk_index]))
        out = _grow_chunk(m, d, n_final, r_chunk, rng, checkpoints,
                          track_triangles, phases, need_adj, record_arrivals)
        deg_c, tri_c, arr_c = out
        for n in checkpoints:
            censuses[n][start:start + r_chunk] = deg_c[n]
        if tri_all is not None:
            tri_all.extend(tri_c)
        if record_arrivals:
            arr_all.append(arr_c)

    return EnsembleResult(
        m=m, d=d, n_final=n_final, replicas=replicas, seed=seed,
        chunk_size=chunk_size, checkpoints=checkpoints,
        degree_censuses=censuses, triangles=tri_all,
        arrivals=np.concatenate(arr_all) if record_arrivals else None)


def _grow_chunk(m, d, n_final, r, rng, checkpoints, track_triangles, phases,
                need_adj, record_arrivals):
    rows = np.arange(r)
    deg = np.zeros((r, n_final + 1), dtype=np.int16)
    deg[:, 1:m + 1] = m - 1
    open_arr = np.zeros((r, n_final + 2), dtype=np.int32)
    open_arr[:, :m] = np.arange(1, m + 1, dtype=np.int32)
    cnt = np.full(r, m, dtype=np.int64)
    targets_mat = np.zeros((r, n_final + 1, m), dtype=np.int32) if need_adj else None

    tris: list[list[tuple[int, int, int]]] = [[] for _ in range(r)]
    if track_triangles and m >= 3:
        seed_tris = [(k, i, j) for i in range(1, m + 1)
                     for j in range(i + 1, m + 1) for k in range(j + 1, m + 1)]
        for lst in tris:
            lst.extend(seed_tris)
    tri_degree_snaps: list[dict[int, np.ndarray]] = [dict() for _ in range(r)]

    checkpoint_set = set(checkpoints)
    tvals = [None] * m

    def snapshot(n: int, census_out: np.ndarray) -> None:
        for i in range(r):
            census_out[i] = np.bincount(deg[i, 1:n + 1], minlength=d + 1)
        if track_triangles:
            for i in range(r):
                t = np.array(tris[i], dtype=np.int64).reshape(-1, 3)
                t = t[t[:, 0] <= n]
                tri_degree_snaps[i][n] = deg[i][t].astype(np.int16)

    censuses = {}
    if m in checkpoint_set:
        censuses[m] = np.zeros((r, d + 1), dtype=np.int64)
        snapshot(m, censuses[m])

    for v in range(m + 1, n_final + 1):
        if np.any(cnt < m):
            bad = int(np.argmax(cnt < m))
            raise ModelViolationError(
                f"replica {bad}: fewer than m={m} open vertices at n={v - 1}")
        for t in range(m):
            idx = rng.integers(t, cnt)
            tv = open_arr[rows, idx]
            open_arr[rows, idx] = open_arr[rows, t]
            open_arr[rows, t] = tv
            tvals[t] = tv
        if need_adj:
            for t in range(m):
                targets_mat[rows, v, t] = tvals[t]
        if track_triangles:
            for i, j in combinations(range(m), 2):
                lo = np.minimum(tvals[i], tvals[j])
                hi = np.maximum(tvals[i], tvals[j])
                adj = hi <= m
                if m >= 1:
                    hit = targets_mat[rows, hi, :] == lo[:, None]
                    adj = adj | hit.any(axis=1)
                for rr in np.nonzero(adj)[0]:
                    tris[rr].append((v, int(lo[rr]), int(hi[rr])))
        for t in range(m - 1, -1, -1):
            w = tvals[t]
            dw = deg[rows, w] + 1
            deg[rows, w] = dw
            sat = dw == d
            if sat.any():
                rs = rows[sat]
                cnt[sat] -= 1
                open_arr[rs, t] = open_arr[rs, cnt[sat]]
        deg[rows, v] = m
        open_arr[rows, cnt] = v
        cnt += 1
        if v in checkpoint_set:
            censuses[v] = np.zeros((r, d + 1), dtype=np.int64)
            snapshot(v, censuses[v])

    tri_out: list[TriangleData] = []
    if track_triangles:
        for i in range(r):
            neighbors = _local_neighbors(
                targets_mat[i], m, n_final,
                {u for tri in tris[i] for u in tri}, phases)
            tri_out.append(TriangleData(triangles=tris[i],
                                        checkpoint_degrees=tri_degree_snaps[i],
                                        neighbors=neighbors))

    arr_out = None
    if record_arrivals:
        arr_out = targets_mat.copy()
    return censuses, tri_out, arr_out


class LocalView:
    """Read-only neighborhood view of one replica at a past time n.

    Edges are never deleted, so trimming the final neighbor lists to vertices
    <= n reproduces the graph at time n exactly (on the covered vertices).
    """

    def __init__(self, data: TriangleData, n: int):
        self._data = data
        self.n = n
        self._cache: dict[int, list[int]] = {}

    def neighbors(self, v: int) -> list[int]:
        got = self._cache.get(v)
        if got is None:
            if v not in self._data.neighbors:
                raise KeyError(
                    f"vertex {v} outside the recorded neighborhood "
                    f"(grow the ensemble with more phases)")
            got = self._data.neighbors_at(v, self.n)
            self._cache[v] = got
        return got

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))


def unicyclic_census_from_triangles(data: TriangleData, n: int, k: int, d: int):
    """The (ell=3, depth k) unicyclic census of one replica at time n, via the
    same ball classifier census_unicyclic uses."""
    from .cycles import UnicyclicCensus, classify_cycle_ball

    view = LocalView(data, n)
    counts: dict[str, int] = {}
    types: dict[str, object] = {}
    complete_count = 0
    multi = 0
    for (v, a, b) in data.triangles:
        if v > n:
            continue
        t = classify_cycle_ball(view, (a, b, v), k, d)
        if t is None:
            multi += 1
            continue
        counts[t.code] = counts.get(t.code, 0) + 1
        types.setdefault(t.code, t)
        if t.complete:
            complete_count += 1
    return UnicyclicCensus(n=n, ell=3, depth=k, counts=counts,
                           complete_count=complete_count,
                           multicyclic_balls=multi, types=types)


def _local_neighbors(targets, m, n_final, seeds: set[int], phases: int):
    """Final neighbor lists for every vertex within `phases - 1` hops of the
    seed set, by repeated vectorized scans of the arrival-target log."""
    flat = targets[m + 1:].ravel()
    heads = np.repeat(np.arange(m + 1, n_final + 1, dtype=np.int64), m)
    neighbors: dict[int, np.ndarray] = {}
    frontier = set(seeds)
    for _ in range(phases):
        todo = [u for u in frontier if u not in neighbors]
        if not todo:
            break
        mark = np.zeros(n_final + 1, dtype=bool)
        mark[todo] = True
        hits = mark[flat]
        incoming: dict[int, list[int]] = {u: [] for u in todo}
        for h, t in zip(heads[hits], flat[hits]):
            incoming[int(t)].append(int(h))
        next_frontier = set()
        for u in todo:
            own = ([w for w in range(1, m + 1) if w != u] if u <= m
                   else [int(x) for x in targets[u]])
            ns = np.array(sorted(set(own) | set(incoming[u])), dtype=np.int64)
            neighbors[u] = ns
            next_frontier.update(int(x) for x in ns)
        frontier = next_frontier
    return neighbors
