import numpy as np

from uagraph.cycles import census_unicyclic, triangles_from_arrivals
from uagraph.ensemble import LocalView, grow_ensemble, unicyclic_census_from_triangles
from uagraph.graph import UAGraph


def rebuild(res, r, n=None):
    n = n or res.n_final
    arr = [tuple(int(x) for x in res.arrivals[r][v])
           for v in range(res.m + 1, n + 1)]
    return UAGraph.from_arrivals(res.m, res.d, arr)


def test_ensemble_determinism():
    a = grow_ensemble(2, 5, 2000, replicas=6, seed=9, track_triangles=True)
    b = grow_ensemble(2, 5, 2000, replicas=6, seed=9, track_triangles=True)
    assert all(x.triangles == y.triangles for x, y in zip(a.triangles, b.triangles))
    assert np.array_equal(a.degree_censuses[2000], b.degree_censuses[2000])
    c = grow_ensemble(2, 5, 2000, replicas=6, seed=10, track_triangles=True)
    assert not np.array_equal(a.degree_censuses[2000], c.degree_censuses[2000])


def test_ensemble_reproducible_given_full_config():
    # replicas in one chunk share the lockstep stream: results are a function
    # of (seed, replicas, chunk_size)
    a = grow_ensemble(2, 5, 500, replicas=7, seed=4, track_triangles=True)
    b = grow_ensemble(2, 5, 500, replicas=7, seed=4, track_triangles=True)
    assert a.triangles[2].triangles == b.triangles[2].triangles
    assert np.array_equal(a.degree_censuses[500], b.degree_censuses[500])


def test_forced_first_triangle():
    res = grow_ensemble(2, 5, 10, replicas=5, seed=0, track_triangles=True)
    for td in res.triangles:
        assert td.triangles[0] == (3, 1, 2)


def test_degree_census_matches_rebuilt_graphs():
    res = grow_ensemble(2, 5, 800, replicas=5, seed=12, record_arrivals=True,
                        checkpoints=[300, 800])
    for r in range(5):
        for n in (300, 800):
            g = rebuild(res, r, n)
            cen = np.bincount(g.degrees[1:], minlength=6)
            assert np.array_equal(cen, res.degree_censuses[n][r])


def test_triangles_match_arrival_recount():
    res = grow_ensemble(2, 5, 1500, replicas=4, seed=7, track_triangles=True,
                        record_arrivals=True)
    for r in range(4):
        g = rebuild(res, r)
        assert res.triangles[r].triangles == triangles_from_arrivals(g)


def test_local_view_matches_graph_at_checkpoints():
    res = grow_ensemble(2, 5, 2000, replicas=3, seed=5, track_triangles=True,
                        record_arrivals=True, checkpoints=[700, 2000])
    for r in range(3):
        td = res.triangles[r]
        for n in (700, 2000):
            g = rebuild(res, r, n)
            view = LocalView(td, n)
            for (v, a, b) in td.triangles:
                if v > n:
                    continue
                for u in (v, a, b):
                    assert view.neighbors(u) == sorted(g.neighbors(u))
                    assert view.degree(u) == g.degree(u)
            # degree snapshots agree with the reconstruction
            tri_at = [t for t in td.triangles if t[0] <= n]
            snap = td.checkpoint_degrees[n]
            for i, tri in enumerate(tri_at):
                assert [g.degree(x) for x in tri] == list(snap[i])


def test_ensemble_census_equals_census_unicyclic():
    res = grow_ensemble(2, 5, 3000, replicas=6, seed=21, track_triangles=True,
                        record_arrivals=True, checkpoints=[1000, 3000])
    for r in range(6):
        td = res.triangles[r]
        for n in (1000, 3000):
            g = rebuild(res, r, n)
            for k in (0, 1):
                ref = census_unicyclic(g, 3, k)
                mine = unicyclic_census_from_triangles(td, n, k, d=5)
                assert mine.counts == ref.counts, (r, n, k)
                assert mine.complete_count == ref.complete_count
                assert mine.multicyclic_balls == ref.multicyclic_balls


def test_m1_ensemble_runs():
    res = grow_ensemble(1, 3, 500, replicas=4, seed=2, record_arrivals=True)
    for r in range(4):
        g = rebuild(res, r)
        g.check_invariants()
