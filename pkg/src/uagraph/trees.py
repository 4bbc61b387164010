"""Rooted tree types: canonical codes, the inductive order, enumeration of
max-admissible types, vertex censuses by ball type, and the layered linear
fixed-point system for the limiting type densities.

A type is the rooted-isomorphism class of the radius-b ball around a vertex
when that ball is acyclic (every internal vertex of an acyclic ball has its
whole neighborhood inside, so the ball is a maximal subtree rooted at its
center). Structures are nested tuples: a vertex is the tuple of its children's
structures, canonically sorted; a leaf is ().

Max-admissible types of depth b have root child count in [m, d], internal
non-root child counts in [m-1, d-1] (0 is allowed when m = 1: dead ends), and
at least one branch reaching depth b. Balls of smaller eccentricity only occur
when the ball exhausts the whole graph; censuses still classify them, but they
are not enumerated and carry no limiting density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .degrees import FixedPoint, solve_rho
from .graph import ball


Structure = tuple  # nested tuples, children canonically sorted


def canonical(structure) -> Structure:
    """Canonical form: children recursively canonicalized and sorted."""
    return tuple(sorted(canonical(c) for c in structure))


def structure_depth(s: Structure) -> int:
    return 1 + max((structure_depth(c) for c in s), default=-1) if s else 0


def structure_size(s: Structure) -> int:
    return 1 + sum(structure_size(c) for c in s)


def code_string(s: Structure) -> str:
    return "(" + "".join(code_string(c) for c in s) + ")"


def structure_from_code(code: str) -> Structure:
    """Inverse of code_string (used to key censuses in files)."""
    pos = 0

    def parse() -> Structure:
        nonlocal pos
        if code[pos] != "(":
            raise ValueError(f"bad code at {pos}: {code!r}")
        pos += 1
        kids = []
        while code[pos] != ")":
            kids.append(parse())
        pos += 1
        return tuple(kids)

    out = parse()
    if pos != len(code):
        raise ValueError(f"trailing characters in code: {code!r}")
    return canonical(out)


def order_key(s: Structure):
    """Key realizing the inductive order: star types by leaf count, then root
    child count, then the lexicographic comparison of child keys sorted in
    decreasing order. Adding a branch strictly increases the key."""
    return (len(s), tuple(sorted((order_key(c) for c in s), reverse=True)))


@dataclass(frozen=True)
class TreeType:
    structure: Structure
    depth: int
    code: str
    size: int
    root_degree: int

    @classmethod
    def from_structure(cls, s) -> "TreeType":
        c = canonical(s)
        return cls(structure=c, depth=structure_depth(c), code=code_string(c),
                   size=structure_size(c), root_degree=len(c))

    @property
    def key(self):
        return order_key(self.structure)


def compare(t1: TreeType, t2: TreeType) -> str:
    """The order on max-admissible types of one depth: 'less' / 'equal' / 'greater'."""
    if t1.depth != t2.depth:
        raise ValueError(f"depth mismatch: {t1.depth} vs {t2.depth}")
    k1, k2 = t1.key, t2.key
    if k1 < k2:
        return "less"
    if k1 > k2:
        return "greater"
    return "equal"


# -- building structures from graphs ------------------------------------------


def ball_structure(graph, root: int, radius: int) -> Structure | None:
    """Rooted structure of the radius-`radius` ball at `root`, or None if the
    induced ball contains a cycle."""
    b = ball(graph, root, radius)
    nv = len(b.vertices)
    if len(b.induced_edges) != nv - 1:
        return None
    children: dict[int, list[int]] = {v: [] for v in b.vertices}
    for v in b.vertices:
        dv = b.depths[v]
        for w in graph.neighbors(v):
            if w in b.depths and b.depths[w] == dv + 1:
                children[v].append(w)

    def build(v) -> Structure:
        return tuple(sorted(build(w) for w in children[v]))

    return build(root)


def canonical_code(graph, root: int) -> TreeType:
    """Type of a whole tree component with a distinguished root.

    Rejects components containing a cycle.
    """
    s = ball_structure(graph, root, graph.n + 1)
    if s is None:
        raise ValueError("input contains a cycle")
    return TreeType.from_structure(s)


# -- enumeration ----------------------------------------------------------------


def _subtree_shapes(m: int, d: int, budget: int) -> list[Structure]:
    """All shapes for a non-root vertex with `budget` levels below it."""
    if budget == 0:
        return [()]
    below = _subtree_shapes(m, d, budget - 1)
    shapes = []
    for c in range(max(m - 1, 0), d):
        for kids in combinations_with_replacement(below, c):
            shapes.append(canonical(kids))
    return sorted(set(shapes))


def enumerate_max_admissible(m: int, d: int, b: int,
                             guard: int = 5000) -> list[TreeType]:
    """All max-admissible types of depth exactly b, sorted ascending in the order.

    Max-admissible means realizable as a maximal subtree for large n: the
    closure of arrival-created types (root degree m, children open types of
    depth b-1) under single-edge modifications. Degree-validity alone is not
    enough: e.g. for m = 2 a root-degree-2 type with a child of child-count 1
    can never occur, because attachment targets end up with degree >= 3.
    """
    if d <= 2 * m:
        raise ValueError(f"need d > 2m, got m={m}, d={d}")
    if b < 1:
        raise ValueError("b must be >= 1")
    types = [TreeType.from_structure(s) for s in _reachable_structures(m, d, b, guard)]
    types.sort(key=lambda t: t.key)
    return types


def _open_structures(m: int, d: int, b: int, guard: int) -> list[Structure]:
    """Reachable structures of depth b whose root is open (degree < d);
    depth 0 is the bare vertex."""
    if b == 0:
        return [()]
    return [s for s in _reachable_structures(m, d, b, guard) if len(s) < d]


def _reachable_structures(m: int, d: int, b: int, guard: int) -> list[Structure]:
    if b == 1:
        return [tuple([()] * s) for s in range(m, d + 1)]
    prev_open = _open_structures(m, d, b - 1, guard)
    frontier = set()
    for kids in combinations_with_replacement(prev_open, m):
        frontier.add(canonical(kids))
    companions = {delta: _open_structures(m, d, b - delta - 2, guard)
                  for delta in range(0, b - 1)}
    reached: set[Structure] = set()
    while frontier:
        st = frontier.pop()
        if st in reached:
            continue
        reached.add(st)
        if len(reached) > guard:
            raise RuntimeError(f"type count exceeds guard {guard} at depth {b}")
        for path, delta, visible, _orbit in internal_positions(st, b - 1):
            if visible >= d:
                continue
            if delta == b - 1:
                nxt = graft(st, path, ())
                if nxt not in reached:
                    frontier.add(nxt)
                continue
            for ms in combinations_with_replacement(companions[delta], m - 1):
                nxt = graft(st, path, canonical(ms))
                if nxt not in reached:
                    frontier.add(nxt)
    return sorted(reached)


# -- censuses --------------------------------------------------------------------


@dataclass
class TreeCensus:
    n: int
    depth: int
    counts: dict[str, int]
    excluded: int
    types: dict[str, TreeType] = field(default_factory=dict)

    def fraction(self, code: str) -> float:
        return self.counts.get(code, 0) / self.n


def census_trees(graph, b: int) -> TreeCensus:
    """Classify every vertex by the rooted type of its radius-b ball; vertices
    with cyclic balls are excluded (counted separately)."""
    if b < 1:
        raise ValueError("b must be >= 1")
    counts: dict[str, int] = {}
    types: dict[str, TreeType] = {}
    excluded = 0
    if b == 2 and getattr(graph, "m", None) == 1:
        return _census_trees_acyclic_b2(graph)
    for v in range(1, graph.n + 1):
        s = ball_structure(graph, v, b)
        if s is None:
            excluded += 1
            continue
        code = code_string(s)
        counts[code] = counts.get(code, 0) + 1
        if code not in types:
            types[code] = TreeType.from_structure(s)
    return TreeCensus(n=graph.n, depth=b, counts=counts, excluded=excluded,
                      types=types)


def _census_trees_acyclic_b2(graph) -> TreeCensus:
    """Vectorized depth-2 census for acyclic graphs (m = 1): the radius-2 ball
    type at v is determined by the multiset of (deg(u) - 1) over neighbors u."""
    n = graph.n
    if getattr(graph, "arrivals", None) is not None and graph.m == 1:
        kids = np.arange(2, n + 1, dtype=np.int64)
        parents = np.fromiter((t[0] for t in graph.arrivals), dtype=np.int64,
                              count=n - 1)
        heads = np.concatenate([kids, parents])
        tails = np.concatenate([parents, kids])
    else:
        adj = graph.adjacency()
        degs = [len(adj[v]) for v in range(1, n + 1)]
        heads = np.repeat(np.arange(1, n + 1, dtype=np.int64), degs)
        tails = (np.concatenate([np.asarray(adj[v], dtype=np.int64)
                                 for v in range(1, n + 1) if adj[v]])
                 if heads.size else np.empty(0, np.int64))
    deg = np.zeros(n + 1, dtype=np.int64)
    np.add.at(deg, heads, 1)
    # fixed-width row of sorted neighbor child-counts per vertex
    dmax = int(deg.max(initial=0))
    order = np.lexsort((deg[tails] - 1, heads))
    heads_s = heads[order]
    vals_s = (deg[tails] - 1)[order]
    start = np.zeros(n + 2, dtype=np.int64)
    np.add.at(start, heads_s + 1, 1)
    start = np.cumsum(start)
    col = np.arange(heads_s.size) - start[heads_s]
    mat = np.full((n + 1, dmax), -1, dtype=np.int16)
    mat[heads_s, col] = vals_s
    rows, inverse, counts = np.unique(mat[1:], axis=0, return_inverse=True,
                                      return_counts=True)
    out_counts: dict[str, int] = {}
    out_types: dict[str, TreeType] = {}
    for row, cnt in zip(rows, counts.tolist()):
        children = tuple(tuple([()] * int(c)) for c in row if c >= 0)
        st = canonical(children)
        cs = code_string(st)
        out_counts[cs] = out_counts.get(cs, 0) + cnt
        out_types.setdefault(cs, TreeType.from_structure(st))
    return TreeCensus(n=n, depth=2, counts=out_counts, excluded=0, types=out_types)


# -- internal positions and grafting ---------------------------------------------


def internal_positions(s: Structure, max_depth: int):
    """Automorphism-orbit representatives of vertices at depth <= max_depth.

    Yields (path, depth, visible_degree, orbit_size): `path` is the tuple of
    child-structure values from the root; identical siblings are one orbit and
    the orbit size multiplies down the path.
    """
    def walk(node: Structure, path: tuple, depth: int, mult: int):
        visible = len(node) if depth == 0 else len(node) + 1
        yield (path, depth, visible, mult)
        if depth < max_depth:
            seen: dict[Structure, int] = {}
            for c in node:
                seen[c] = seen.get(c, 0) + 1
            for c, cnt in seen.items():
                yield from walk(c, path + (c,), depth + 1, mult * cnt)

    yield from walk(s, (), 0, 1)


def graft(s: Structure, path: tuple, new_child: Structure) -> Structure:
    """Insert `new_child` under the vertex addressed by `path` (one instance of
    each child value along the way)."""
    if not path:
        return canonical(tuple(list(s) + [new_child]))
    kids = list(s)
    kids.remove(path[0])
    kids.append(graft(path[0], path[1:], new_child))
    return canonical(tuple(kids))


# -- the layered fixed point -------------------------------------------------------


@dataclass
class TreeLayer:
    depth: int
    types: list[TreeType]              # ascending in the order
    creation: np.ndarray               # Y
    matrix: np.ndarray                 # A (conversions; diagonal = -outflow)
    densities: np.ndarray              # solution of (A - I) z = -Y
    residual: float


@dataclass
class TreeFixedPoint:
    m: int
    d: int
    depth: int
    degree_fixed_point: FixedPoint
    layers: dict[int, TreeLayer]

    def table(self, depth: int) -> dict[str, float]:
        layer = self.layers[depth]
        return {t.code: float(z) for t, z in zip(layer.types, layer.densities)}

    def density(self, depth: int, code: str) -> float:
        return self.table(depth).get(code, 0.0)


def _level_densities(m: int, d: int, depth: int, fp: FixedPoint,
                     solved: dict[int, TreeLayer]) -> list[tuple[Structure, float]]:
    """(structure, density) pairs for one depth; depth 0 is the bare open vertex."""
    if depth == 0:
        return [((), 1.0 - float(fp.rho[-1]))]
    if depth == 1:
        return [(tuple([()] * s), float(fp.rho[s - m])) for s in range(m, d + 1)]
    layer = solved[depth]
    return [(t.structure, float(z)) for t, z in zip(layer.types, layer.densities)]


def _open_level(m: int, d: int, depth: int, fp: FixedPoint,
                solved: dict[int, TreeLayer]) -> list[tuple[Structure, float]]:
    """Open-root restriction of a level (the bare vertex is open by definition)."""
    out = []
    for s, rho in _level_densities(m, d, depth, fp, solved):
        if depth == 0 or len(s) < d:
            out.append((s, rho))
    return out


def _multiset_weight(ms: Sequence[Structure], rho_of: dict[Structure, float],
                     m: int, one_minus_rho_d: float) -> float:
    """Rate weight m!/prod(mu_j!) * prod rho / (1-rho_d)^m for a target multiset.

    For creations `ms` has m entries; for single-edge modifications it has the
    m-1 companion targets (the multinomial numerator stays m! because the
    attachment vertex itself is a distinct member of the drawn m-subset).
    """
    mult: dict[Structure, int] = {}
    for s in ms:
        mult[s] = mult.get(s, 0) + 1
    coef = math.factorial(m)
    for c in mult.values():
        coef //= math.factorial(c)
    w = float(coef)
    for s in ms:
        w *= rho_of[s]
    return w / one_minus_rho_d ** m


def solve_tree_fixed_point(m: int, d: int, b: int, tol: float = 1e-10,
                           guard: int = 5000) -> TreeFixedPoint:
    """Layered solve: depth 1 is the degree fixed point; each deeper layer is a
    linear system (A - I) z = -Y solved by forward substitution in the order.

    Y enumerates arrivals whose m targets are roots of open depth-(b-1) types;
    A enumerates single-edge modifications: an edge into an internal vertex at
    depth delta with the remaining m-1 edges to roots of open depth-(b-delta-2)
    types (bare leaf when delta = b-1). Rates carry the orbit factor of the
    attachment vertex and m/(1-rho_d) per drawn edge.
    """
    fp = solve_rho(m, d)
    one_minus = 1.0 - float(fp.rho[-1])
    layers: dict[int, TreeLayer] = {}

    star_types = enumerate_max_admissible(m, d, 1, guard=guard)
    layers[1] = TreeLayer(
        depth=1, types=star_types,
        creation=np.zeros(len(star_types)),
        matrix=np.zeros((len(star_types), len(star_types))),
        densities=np.array([fp.rho[len(t.structure) - m] for t in star_types]),
        residual=fp.residual)

    for depth in range(2, b + 1):
        types = enumerate_max_admissible(m, d, depth, guard=guard)
        index = {t.structure: i for i, t in enumerate(types)}
        r = len(types)
        creation = np.zeros(r)
        a_mat = np.zeros((r, r))

        prev_open = _open_level(m, d, depth - 1, fp, layers)
        rho_prev = dict(prev_open)
        for ms in combinations_with_replacement([s for s, _ in prev_open], m):
            target = canonical(ms)
            idx = index.get(target)
            if idx is None:
                raise RuntimeError(
                    f"creation target {code_string(target)} missing from depth-{depth} types")
            creation[idx] += _multiset_weight(ms, rho_prev, m, one_minus)

        for t in types:
            j = index[t.structure]
            out_rate = 0.0
            for path, delta, visible, orbit in internal_positions(t.structure, depth - 1):
                if visible >= d:
                    continue
                out_rate += orbit * m / one_minus
                if delta == depth - 1:
                    # added vertex is a boundary leaf; companions are invisible
                    result = graft(t.structure, path, ())
                    i = index[result]
                    if i <= j:
                        raise RuntimeError("modification did not increase the order")
                    a_mat[i, j] += orbit * m / one_minus
                    continue
                level = _open_level(m, d, depth - delta - 2, fp, layers)
                rho_of = dict(level)
                for ms in combinations_with_replacement(
                        [s for s, _ in level], m - 1):
                    w = orbit * _multiset_weight(ms, rho_of, m, one_minus)
                    new_child = canonical(ms)
                    result = graft(t.structure, path, new_child)
                    i = index.get(result)
                    if i is None:
                        raise RuntimeError(
                            f"modification target {code_string(result)} missing "
                            f"from depth-{depth} types")
                    if i <= j:
                        raise RuntimeError("modification did not increase the order")
                    a_mat[i, j] += w
            a_mat[j, j] = -out_rate

        # forward substitution in the order (A is strictly lower triangular
        # off the diagonal: modifications strictly increase the order)
        z = np.zeros(r)
        for i in range(r):
            inflow = float(a_mat[i, :i] @ z[:i])
            z[i] = (creation[i] + inflow) / (1.0 - a_mat[i, i])
        if np.any(z <= 0):
            bad = types[int(np.argmin(z))].code
            raise RuntimeError(f"non-positive density at depth {depth} for {bad}")
        residual = float(np.max(np.abs((a_mat - np.eye(r)) @ z + creation)))
        if residual >= tol:
            raise RuntimeError(f"layer {depth} residual {residual} above tol {tol}")
        layers[depth] = TreeLayer(depth=depth, types=types, creation=creation,
                                  matrix=a_mat, densities=z, residual=residual)

    return TreeFixedPoint(m=m, d=d, depth=b, degree_fixed_point=fp, layers=layers)
