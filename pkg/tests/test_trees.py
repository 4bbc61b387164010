import random
from itertools import combinations_with_replacement

import numpy as np
import pytest

from uagraph.degrees import census_degrees, solve_rho
from uagraph.graph import SimpleGraph, ball, new_seed_graph
from uagraph.trees import (
    TreeType,
    canonical,
    canonical_code,
    census_trees,
    code_string,
    compare,
    enumerate_max_admissible,
    graft,
    internal_positions,
    order_key,
    solve_tree_fixed_point,
    structure_from_code,
)


# -- oracle: rooted isomorphism by backtracking child matching (no codes) -----


def rooted_iso(adj1, r1, adj2, r2):
    def match(u, v, pu, pv):
        ch1 = [w for w in adj1[u] if w != pu]
        ch2 = [w for w in adj2[v] if w != pv]
        if len(ch1) != len(ch2):
            return False
        if not ch1:
            return True
        used = [False] * len(ch2)

        def assign(i):
            if i == len(ch1):
                return True
            for j, w2 in enumerate(ch2):
                if not used[j] and match(ch1[i], w2, u, v):
                    used[j] = True
                    if assign(i + 1):
                        return True
                    used[j] = False
            return False

        return assign(0)

    return match(r1, r2, None, None)


def random_tree(rnd, size):
    parents = [None] + [rnd.randrange(i) for i in range(1, size)]
    edges = [(i + 1, parents[i] + 1) for i in range(1, size)]
    return SimpleGraph(size, edges)


def test_single_vertex_code():
    g = SimpleGraph(1, [])
    t = canonical_code(g, 1)
    assert t.code == "()" and t.depth == 0 and t.size == 1


def test_star_code_label_invariance():
    codes = set()
    for order in ([2, 3, 4], [4, 2, 3], [3, 4, 2]):
        g = SimpleGraph(4, [(1, v) for v in order])
        codes.add(canonical_code(g, 1).code)
    assert len(codes) == 1


def test_canonical_code_rejects_cycles():
    g = SimpleGraph(3, [(1, 2), (2, 3), (1, 3)])
    with pytest.raises(ValueError, match="cycle"):
        canonical_code(g, 1)


def test_code_equality_matches_brute_force_isomorphism():
    rnd = random.Random(42)
    trees = [random_tree(rnd, rnd.randint(1, 12)) for _ in range(200)]
    types = [canonical_code(g, 1) for g in trees]
    for i in range(len(trees)):
        for j in range(i + 1, len(trees)):
            same_code = types[i].code == types[j].code
            if trees[i].n != trees[j].n:
                assert not same_code
                continue
            oracle = rooted_iso(trees[i].adjacency(), 1, trees[j].adjacency(), 1)
            assert same_code == oracle, (types[i].code, types[j].code)


def test_compare_stars():
    star2 = TreeType.from_structure(((), ()))
    star3 = TreeType.from_structure(((), (), ()))
    assert compare(star2, star3) == "less"
    assert compare(star3, star2) == "greater"
    assert compare(star2, star2) == "equal"


def test_compare_depth_two_by_root_child_count():
    # root with one child-star_2 vs root with two children: s1=1 < s2=2
    t1 = TreeType.from_structure(((((), ())),))
    t2 = TreeType.from_structure((((),), ((),)))
    assert t1.root_degree == 1 and t2.root_degree == 2
    assert compare(t1, t2) == "less"


def test_compare_depth_mismatch():
    t1 = TreeType.from_structure(((), ()))
    t2 = TreeType.from_structure((((),),))
    with pytest.raises(ValueError, match="depth"):
        compare(t1, t2)


def test_enumerate_stars():
    types = enumerate_max_admissible(1, 3, 1)
    assert [t.root_degree for t in types] == [1, 2, 3]
    types = enumerate_max_admissible(2, 5, 1)
    assert [t.root_degree for t in types] == [2, 3, 4, 5]


def brute_force_depth2_types(m, d):
    """Independent generator: all depth-2 structures under the degree rules,
    for m = 1 (where every degree-valid type is realizable)."""
    child_shapes = []
    for c in range(0, d):
        child_shapes.append(tuple([()] * c))
    out = set()
    for s in range(m, d + 1):
        for kids in combinations_with_replacement(child_shapes, s):
            st = canonical(kids)
            if max((len(k) for k in st), default=0) >= 1:
                ok = all(len(k) <= d - 1 for k in st)
                if ok:
                    out.add(st)
    return out


def test_enumerate_depth2_m1_matches_brute_force():
    got = {t.structure for t in enumerate_max_admissible(1, 3, 2)}
    expect = brute_force_depth2_types(1, 3)
    assert got == expect
    assert len(got) == 16


def test_enumerate_depth2_m2_excludes_unrealizable():
    types = {t.structure for t in enumerate_max_admissible(2, 5, 2)}
    # a root-degree-2 type with a child of child-count 1 can never occur:
    # both attachment targets end with degree >= 3
    bad = canonical(((((),),), (((),),)))
    assert bad not in types
    for st in types:
        if len(st) == 2:
            assert all(len(kid) >= 2 for kid in st)
    assert len(types) == 105


def test_enumerated_types_cover_simulation():
    types = {t.code for t in enumerate_max_admissible(2, 5, 2)}
    g = new_seed_graph(2, 5).grow(20_000 - 2, rng_seed=8)
    cen = census_trees(g, 2)
    # transient seed-era types may linger at tiny n; none should at 2e4
    assert set(cen.counts) <= types


def test_order_increases_under_grafting():
    types = enumerate_max_admissible(1, 3, 2)
    by_structure = {t.structure: t for t in types}
    checked = 0
    for t in types:
        for path, delta, visible, _orbit in internal_positions(t.structure, 1):
            if visible >= 3:
                continue
            bigger = graft(t.structure, path, ())
            if bigger in by_structure:
                assert compare(t, by_structure[bigger]) == "less"
                checked += 1
    assert checked > 10


def test_orbit_factors_uniform_tree():
    # depth-3 tree, all inner vertices of degree 3: orbit sizes 1, 3, 6
    k = 3
    leaf2 = tuple([()] * (k - 1))
    mid = tuple([leaf2] * (k - 1))
    root = tuple([mid] * k)
    orbits = {}
    for path, delta, visible, orbit in internal_positions(root, 2):
        orbits.setdefault(delta, set()).add(orbit)
    assert orbits[0] == {1}
    assert orbits[1] == {k}
    assert orbits[2] == {k * (k - 1)}


def test_census_tree_graph_no_exclusions():
    g = new_seed_graph(1, 3).grow(999, rng_seed=14)
    for b in (1, 2, 3):
        cen = census_trees(g, b)
        assert cen.excluded == 0
        assert sum(cen.counts.values()) == g.n


def test_census_triangle_all_excluded():
    g = new_seed_graph(3, 7)  # K_3 seed: every radius-1 ball is the triangle
    cen = census_trees(g, 1)
    assert cen.excluded == 3
    assert not cen.counts


def test_census_b1_cross_check_with_degree_census():
    g = new_seed_graph(2, 5).grow(2000 - 2, rng_seed=21)
    cen = census_trees(g, 1)
    deg_census = census_degrees(g)
    # independent per-vertex recount of acyclic radius-1 balls by degree
    acyclic_by_degree = [0] * 6
    for v in range(1, g.n + 1):
        b = ball(g, v, 1)
        if len(b.induced_edges) == len(b.vertices) - 1:
            acyclic_by_degree[g.degree(v)] += 1
    for s in range(2, 6):
        code = code_string(canonical(tuple([()] * s)))
        assert cen.counts.get(code, 0) == acyclic_by_degree[s]
        assert acyclic_by_degree[s] <= deg_census.counts[s]
    assert sum(cen.counts.values()) + cen.excluded == g.n


def test_census_fast_path_matches_generic():
    g = new_seed_graph(1, 3).grow(3000 - 1, rng_seed=33)
    fast = census_trees(g, 2)  # dispatches to the vectorized acyclic path
    generic_counts = {}
    from uagraph.trees import ball_structure
    for v in range(1, g.n + 1):
        s = ball_structure(g, v, 2)
        code = code_string(s)
        generic_counts[code] = generic_counts.get(code, 0) + 1
    assert fast.counts == generic_counts


def test_census_reproducible_from_snapshot(tmp_path):
    from uagraph.graph import read_snapshot, write_snapshot
    g = new_seed_graph(2, 5).grow(500, rng_seed=3)
    cen1 = census_trees(g, 2)
    p = tmp_path / "g.ua"
    write_snapshot(g, p)
    cen2 = census_trees(read_snapshot(p), 2)
    assert cen1.counts == cen2.counts and cen1.excluded == cen2.excluded


def test_fixed_point_layer1_equals_solve_rho():
    tfp = solve_tree_fixed_point(1, 3, 1)
    fp = solve_rho(1, 3)
    lay = tfp.layers[1]
    for t, z in zip(lay.types, lay.densities):
        assert abs(z - fp.rho_of_degree(t.root_degree)) < 1e-12


def test_fixed_point_layer2_structure():
    for (m, d) in [(1, 3), (2, 5)]:
        tfp = solve_tree_fixed_point(m, d, 2)
        lay = tfp.layers[2]
        a = lay.matrix
        assert np.all(lay.densities > 0)
        assert abs(lay.densities.sum() - 1.0) < 1e-9
        assert lay.residual < 1e-10
        # strictly lower triangular off the diagonal, negative diagonal of A-I
        assert np.allclose(a, np.tril(a))
        assert np.all(np.diag(a) - 1.0 < 0)
        # conversions conserve mass: column sums vanish
        assert np.max(np.abs(a.sum(axis=0))) < 1e-12


def test_fixed_point_empirical_depth2():
    tfp = solve_tree_fixed_point(1, 3, 2)
    table = tfp.table(2)
    g = new_seed_graph(1, 3).grow(100_000 - 1, rng_seed=17)
    cen = census_trees(g, 2)
    dev = max(abs(cen.fraction(code) - rho) for code, rho in table.items())
    assert dev < 0.01


def test_structure_code_round_trip():
    for t in enumerate_max_admissible(2, 5, 2)[:20]:
        assert structure_from_code(t.code) == t.structure


def test_order_key_total_order():
    types = enumerate_max_admissible(2, 5, 2)
    keys = [order_key(t.structure) for t in types]
    assert len(set(keys)) == len(keys)
    assert keys == sorted(keys)
