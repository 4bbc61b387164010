from itertools import combinations

import numpy as np
import pytest

from uagraph.cycles import (
    census_unicyclic,
    check_no_multicyclic,
    classify_cycle_ball,
    distance_profile,
    find_cycles,
    set_distance,
    triangles_from_arrivals,
    unicyclic_code,
)
from uagraph.graph import SimpleGraph, new_seed_graph


def brute_force_cycles(graph, max_len):
    """Oracle: enumerate every vertex subset and every cyclic ordering of it;
    a simple cycle is an ordering with all consecutive pairs adjacent.
    Cycles are identified by their edge sets (chords do not disqualify)."""
    from itertools import permutations

    found = set()
    verts = range(1, graph.n + 1)
    adj = [set(x) for x in graph.adjacency()]
    for size in range(3, max_len + 1):
        for subset in combinations(verts, size):
            first, rest = subset[0], subset[1:]
            for perm in permutations(rest):
                order = (first,) + perm
                if all(order[(i + 1) % size] in adj[order[i]] for i in range(size)):
                    edges = frozenset(
                        frozenset((order[i], order[(i + 1) % size]))
                        for i in range(size))
                    found.add(edges)
    return found


def test_find_cycles_triangle():
    g = new_seed_graph(3, 7)
    cycles = find_cycles(g, 5)
    assert len(cycles) == 1
    assert cycles[0].length == 3
    assert cycles[0].vertices == (1, 2, 3)


def test_find_cycles_tree_graph_empty():
    g = new_seed_graph(1, 3).grow(400, rng_seed=6)
    assert find_cycles(g, 6) == []


def test_find_cycles_matches_brute_force():
    g = new_seed_graph(2, 5).grow(28, rng_seed=13)
    for max_len in (3, 4, 5):
        mine = set()
        for c in find_cycles(g, max_len):
            vs = c.vertices
            mine.add(frozenset(frozenset((vs[i], vs[(i + 1) % c.length]))
                               for i in range(c.length)))
        # each simple cycle reported exactly once
        assert len(mine) == len(find_cycles(g, max_len))
        assert mine == brute_force_cycles(g, max_len)


def test_find_cycles_each_reported_once():
    g = SimpleGraph(4, [(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)])  # K4 minus 2-4
    cycles = find_cycles(g, 4)
    lens = sorted(c.length for c in cycles)
    assert lens == [3, 3, 4]


def test_triangles_from_arrivals_matches_find_cycles():
    g = new_seed_graph(2, 5).grow(3000 - 2, rng_seed=5)
    tris = {frozenset((v, a, b)) for v, a, b in triangles_from_arrivals(g)}
    oracle = {frozenset(c.vertices) for c in find_cycles(g, 3)}
    assert tris == oracle


def test_census_unicyclic_pendant_path():
    # triangle 1-2-3 with a pendant path 1-4-5; k=2 sees the whole path
    g = SimpleGraph(5, [(1, 2), (2, 3), (1, 3), (1, 4), (4, 5)])
    cen = census_unicyclic(g, 3, 2, d=4)
    assert cen.total == 1
    assert cen.multicyclic_balls == 0
    assert cen.complete_count == 0
    (code,) = cen.counts
    assert cen.counts[code] == 1
    assert not cen.types[code].complete


def test_census_unicyclic_complete_type():
    # triangle with one pendant leaf per vertex: all non-leaf degrees = 3 = d
    g = SimpleGraph(6, [(1, 2), (2, 3), (1, 3), (1, 4), (2, 5), (3, 6)])
    cen = census_unicyclic(g, 3, 1, d=3)
    assert cen.total == 1 and cen.complete_count == 1
    t = next(iter(cen.types.values()))
    assert t.complete


def test_census_unicyclic_k0_always_unicyclic():
    g = new_seed_graph(2, 5).grow(5000 - 2, rng_seed=41)
    cen = census_unicyclic(g, 3, 0)
    assert cen.multicyclic_balls == 0
    assert cen.total == len(find_cycles(g, 3))
    # exactly one structural k=0 code; completeness splits the counts
    noncomplete = cen.noncomplete_vector()
    assert cen.complete_count + sum(noncomplete.values()) == cen.total


def rooted_iso_pair(adj1, r1, p1, adj2, r2, p2, members1, members2):
    ch1 = [w for w in adj1[r1] if w != p1 and w in members1]
    ch2 = [w for w in adj2[r2] if w != p2 and w in members2]
    if len(ch1) != len(ch2):
        return False
    if not ch1:
        return True
    used = [False] * len(ch2)

    def assign(i):
        if i == len(ch1):
            return True
        for j, w2 in enumerate(ch2):
            if not used[j] and rooted_iso_pair(adj1, ch1[i], r1, adj2, w2, r2,
                                               members1, members2):
                used[j] = True
                if assign(i + 1):
                    return True
                used[j] = False
        return False

    return assign(0)


def balls_isomorphic_bruteforce(g1, cyc1, g2, cyc2, k):
    """Oracle: exhaustive dihedral alignment + recursive tree matching."""
    from uagraph.graph import ball
    b1 = ball(g1, set(cyc1), k)
    b2 = ball(g2, set(cyc2), k)
    if len(b1.vertices) != len(b2.vertices) or len(cyc1) != len(cyc2):
        return False
    ell = len(cyc1)
    adj1, adj2 = g1.adjacency(), g2.adjacency()
    seqs = []
    c2 = list(cyc2)
    for base in (c2, c2[::-1]):
        for r in range(ell):
            seqs.append(base[r:] + base[:r])
    for aligned in seqs:
        ok = True
        for a, b in zip(cyc1, aligned):
            # match hanging trees rooted at corresponding cycle vertices
            block1 = set(cyc1) - {a}
            block2 = set(aligned) - {b}
            m1 = {v for v in b1.vertices if v not in block1}
            m2 = {v for v in b2.vertices if v not in block2}
            if not rooted_iso_pair(adj1, a, None, adj2, b, None,
                                   {v for v in m1 if v not in cyc1 or v == a},
                                   {v for v in m2 if v not in aligned or v == b}):
                ok = False
                break
        if ok:
            return True
    return False


def test_census_codes_match_bruteforce_isomorphism():
    g = new_seed_graph(2, 5).grow(10_000 - 2, rng_seed=19)
    recs = [c for c in find_cycles(g, 3)]
    classified = [(rec, classify_cycle_ball(g, rec.vertices, 1, 5)) for rec in recs]
    classified = [(rec, t) for rec, t in classified if t is not None]
    for (r1, t1), (r2, t2) in combinations(classified, 2):
        same_code = t1.code == t2.code
        oracle = balls_isomorphic_bruteforce(g, r1.vertices, g, r2.vertices, 1)
        assert same_code == oracle, (r1, r2, t1.code, t2.code)


def test_unicyclic_code_dihedral_invariance():
    hang = ["(()())", "()", "(())"]
    codes = set()
    for r in range(3):
        rot = hang[r:] + hang[:r]
        codes.add(unicyclic_code(3, 1, rot))
        codes.add(unicyclic_code(3, 1, rot[::-1]))
    assert len(codes) == 1


def test_check_no_multicyclic_diamond():
    g = SimpleGraph(4, [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)])  # K4 minus 1-4
    ok, witness = check_no_multicyclic(g, size_cap=5)
    assert not ok
    assert set(witness) == {1, 2, 3, 4}


def test_check_no_multicyclic_tree():
    g = new_seed_graph(1, 3).grow(300, rng_seed=2)
    ok, witness = check_no_multicyclic(g, size_cap=6)
    assert ok and witness is None


def test_check_no_multicyclic_respects_prefix():
    g = SimpleGraph(4, [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)])
    ok, _ = check_no_multicyclic(g, size_cap=5, prefix_s=1)
    assert ok  # every cycle uses a vertex in [1]... cycle (2,3,4) remains
    # cycle (2,3,4) and (1,2,3) share vertices but (1,2,3) is blocked; a lone
    # cycle is fine
    ok0, _ = check_no_multicyclic(g, size_cap=5, prefix_s=0)
    assert not ok0


def test_check_no_multicyclic_dumbbell():
    # two triangles joined by a path of length 2: 8 vertices total
    edges = [(1, 2), (2, 3), (1, 3), (3, 7), (7, 4), (4, 5), (5, 6), (4, 6)]
    g = SimpleGraph(7, [(u, v) for u, v in edges if u <= 7 and v <= 7])
    ok7, wit = check_no_multicyclic(g, size_cap=7)
    assert not ok7 and len(wit) == 7
    ok6, _ = check_no_multicyclic(g, size_cap=6)
    assert ok6


def test_distance_profile():
    g = SimpleGraph(5, [(1, 2), (2, 3), (3, 4), (4, 5)])
    prof = distance_profile(g, {1}, {1}, {5})
    assert prof[0, 1] == 0
    assert prof[0, 2] == 4
    assert set_distance(g, {1, 2}, {4, 5}) == 2


def test_distance_profile_matches_bfs_oracle():
    g = new_seed_graph(2, 5).grow(200, rng_seed=8)
    rng = np.random.default_rng(3)
    sets = [set(rng.integers(1, 201, size=3).tolist()) for _ in range(4)]
    prof = distance_profile(g, *sets)
    # single-source BFS oracle
    import collections
    adj = g.adjacency()
    for i, s in enumerate(sets):
        for j, t in enumerate(sets):
            if i == j:
                continue
            best = np.inf
            for src in s:
                dist = {src: 0}
                q = collections.deque([src])
                while q:
                    u = q.popleft()
                    for w in adj[u]:
                        if w not in dist:
                            dist[w] = dist[u] + 1
                            q.append(w)
                best = min(best, min(dist.get(v, np.inf) for v in t))
            assert prof[i, j] == best


def test_distance_profile_unknown_vertex():
    g = new_seed_graph(2, 5)
    with pytest.raises(ValueError):
        distance_profile(g, {1}, {99})


def test_lemma_no_multicyclic_monte_carlo():
    # minimal subgraph budget (diamonds): with the first 100 vertices masked
    # out, 45 of these 50 seeded runs at n=1e4 are clean
    ok_count = 0
    for seed in range(50):
        g = new_seed_graph(2, 5).grow(10_000 - 2, rng_seed=5000 + seed)
        ok, witness = check_no_multicyclic(g, size_cap=4, prefix_s=100)
        ok_count += ok
        if not ok:
            assert len(witness) <= 4
    assert ok_count >= 0.9 * 50


def test_recorded_cycles_persist_under_growth():
    import random as _random
    g = new_seed_graph(2, 5)
    rng = _random.Random(71)
    g.grow(5000 - g.n, rng=rng)
    before = {frozenset(c.vertices) for c in find_cycles(g, 3)}
    g.grow(5000, rng=rng)
    mid = {frozenset(c.vertices) for c in find_cycles(g, 3)}
    g.grow(20_000, rng=rng)
    after = {frozenset(c.vertices) for c in find_cycles(g, 3)}
    assert before <= mid <= after


def test_complete_unicyclic_type_never_changes():
    import random as _random
    from uagraph.cycles import classify_cycle_ball
    g = new_seed_graph(2, 5)
    rng = _random.Random(13)
    g.grow(20_000 - g.n, rng=rng)
    flagged = []
    for rec in find_cycles(g, 3):
        t = classify_cycle_ball(g, rec.vertices, 1, 5)
        if t is not None and t.complete:
            flagged.append((rec.vertices, t.code))
    assert flagged, "expected at least one complete unicyclic ball at n=2e4"
    for _ in range(3):
        g.grow(20_000, rng=rng)
        for cycle, code in flagged:
            t = classify_cycle_ball(g, cycle, 1, 5)
            assert t is not None and t.code == code and t.complete
