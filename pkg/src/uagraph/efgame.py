"""Ehrenfeucht-Fraisse machinery: an exact small-graph game solver, the
structural properties Q1/Q2 that guarantee a Duplicator win, and the explicit
Duplicator strategy built on them.

The exact solver evaluates the R-round game by alternating min-max over all
Spoiler moves and Duplicator replies, memoizing pebbled positions; Duplicator
wins iff every play can be answered so the pebble map stays a partial
isomorphism. The strategy module replays the three-case reply rule: copy
vertices near the initial segment, map through a stored round isomorphism
inside a previous ball, and transfer fresh territory to an isomorphic far
copy of the same maximal tree or unicyclic ball type.

Q1's abundance clause is checked over the ball types realized in the graph
(for each strategy radius 2^(R-j+1)): the literal quantification over every
abstract max-admissible type of depth up to 3^R is not satisfiable by any
graph of testable size, and realized types are exactly what the strategy can
be asked to transfer. Pair-level coverage (each type realized in either graph
has R far copies in both) is verified as part of the strategy preconditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .cycles import classify_cycle_ball, find_cycles
from .graph import ball
from .trees import ball_structure, code_string

DUPLICATOR = "Duplicator"
SPOILER = "Spoiler"


@dataclass(frozen=True)
class GameConfig:
    R: int
    n0: int
    N0: int
    d: int

    def __post_init__(self):
        if self.R < 1:
            raise ValueError("R must be >= 1")
        if not 0 <= self.n0 < self.N0:
            raise ValueError("need N0 > n0 >= 0")

    @property
    def a(self) -> int:
        return 3 ** self.R

    def radius(self, round_index: int) -> int:
        return 2 ** (self.R - round_index + 1)

    @property
    def radii(self) -> tuple[int, ...]:
        return tuple(self.radius(i) for i in range(1, self.R + 1))


# -- exact game solver ------------------------------------------------------------


class _Adj:
    def __init__(self, g):
        self.sets = [set()] + [set(g.neighbors(v)) for v in range(1, g.n + 1)]
        self.n = g.n


def _extends_iso(adj1: _Adj, adj2: _Adj, xs, ys, v, w) -> bool:
    for xj, yj in zip(xs, ys):
        if (v == xj) != (w == yj):
            return False
        if (xj in adj1.sets[v]) != (yj in adj2.sets[w]):
            return False
    return True


def ef_solve(g1, g2, rounds: int, size_cap: int = 16, rounds_cap: int = 4) -> str:
    """Exact winner of the R-round game on two graphs (exhaustive, memoized)."""
    if rounds > rounds_cap:
        raise ValueError(f"rounds {rounds} exceeds the cap {rounds_cap}")
    if g1.n > size_cap or g2.n > size_cap:
        raise ValueError(f"graph size exceeds the cap {size_cap}")
    adj1, adj2 = _Adj(g1), _Adj(g2)
    memo: dict = {}

    def dup_wins(xs, ys, r) -> bool:
        if r == 0:
            return True
        key = (xs, ys, r)
        got = memo.get(key)
        if got is not None:
            return got
        ok = True
        for side in (0, 1):
            sa, sb = (adj1, adj2) if side == 0 else (adj2, adj1)
            sxs, sys = (xs, ys) if side == 0 else (ys, xs)
            for v in range(1, sa.n + 1):
                answered = False
                for w in range(1, sb.n + 1):
                    if _extends_iso(sa, sb, sxs, sys, v, w):
                        nxs, nys = sxs + (v,), sys + (w,)
                        if side == 1:
                            nxs, nys = nys, nxs
                        if dup_wins(nxs, nys, r - 1):
                            answered = True
                            break
                if not answered:
                    ok = False
                    break
            if not ok:
                break
        memo[key] = ok
        return ok

    return DUPLICATOR if dup_wins((), (), rounds) else SPOILER


def partition_classes(graphs, rounds: int, size_cap: int = 16,
                      rounds_cap: int = 4) -> list[list[int]]:
    """Partition graph indices by the relation 'Duplicator wins the R-round
    game'; asserts the relation is an equivalence on the sample."""
    n = len(graphs)
    wins = {}
    for i in range(n):
        for j in range(i, n):
            wins[(i, j)] = ef_solve(graphs[i], graphs[j], rounds,
                                    size_cap, rounds_cap) == DUPLICATOR
    for i in range(n):
        assert wins[(i, i)], "identity game lost"
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                a, b, c = wins[(i, j)], wins[(j, k)], wins[(i, k)]
                if a and b:
                    assert c, f"transitivity violated on ({i},{j},{k})"
    classes: list[list[int]] = []
    assigned = {}
    for i in range(n):
        placed = False
        for cls in classes:
            j = cls[0]
            if wins[(min(i, j), max(i, j))]:
                cls.append(i)
                placed = True
                break
        if not placed:
            classes.append([i])
    return classes


# -- structure summaries ------------------------------------------------------------


@dataclass
class BallTypeIndex:
    radius: int
    roots_by_code: dict[str, list[int]]
    ball_of_root: dict[int, frozenset[int]]


@dataclass
class UnicyclicCopy:
    kernel: tuple[int, ...]
    code: str
    complete: bool
    ball_vertices: frozenset[int]


@dataclass
class StructureSummary:
    """Per-graph tables the checkers and the strategy share."""

    config: GameConfig
    kernels_2r: list[UnicyclicCopy]          # non-complete 2^R-graphs, kernel outside [n0]
    a_graphs: list[UnicyclicCopy]            # all a-graph copies (cycles <= a)
    tree_types: dict[int, BallTypeIndex]     # per strategy radius
    core_degrees_ok: bool
    cycles: list = field(default_factory=list)


def _acyclic_ball_code(g, v: int, radius: int) -> tuple[str, frozenset[int]] | None:
    s = ball_structure(g, v, radius)
    if s is None:
        return None
    b = ball(g, v, radius)
    return code_string(s), b.vertices


def summarize_structure(g, cfg: GameConfig) -> StructureSummary:
    a = cfg.a
    two_r = 2 ** cfg.R
    kernels = []
    a_graphs = []
    for rec in find_cycles(g, a):
        t_a = classify_cycle_ball(g, rec.vertices, a, cfg.d)
        if t_a is not None:
            a_graphs.append(UnicyclicCopy(
                kernel=rec.vertices, code=t_a.code, complete=t_a.complete,
                ball_vertices=ball(g, set(rec.vertices), a).vertices))
        if rec.length <= two_r and rec.min_vertex > cfg.n0:
            t = classify_cycle_ball(g, rec.vertices, two_r, cfg.d)
            if t is not None and not t.complete:
                kernels.append(UnicyclicCopy(
                    kernel=rec.vertices, code=t.code, complete=False,
                    ball_vertices=ball(g, set(rec.vertices), two_r).vertices))
    tree_types: dict[int, BallTypeIndex] = {}
    for radius in sorted(set(cfg.radii)):
        roots: dict[str, list[int]] = {}
        ball_of: dict[int, frozenset[int]] = {}
        for v in range(1, g.n + 1):
            got = _acyclic_ball_code(g, v, radius)
            if got is None:
                continue
            code, verts = got
            roots.setdefault(code, []).append(v)
            ball_of[v] = verts
        tree_types[radius] = BallTypeIndex(radius=radius, roots_by_code=roots,
                                           ball_of_root=ball_of)
    core_ok = all(g.degree(v) == cfg.d for v in range(1, min(cfg.N0, g.n) + 1))
    return StructureSummary(config=cfg, kernels_2r=kernels, a_graphs=a_graphs,
                            tree_types=tree_types, core_degrees_ok=core_ok,
                            cycles=find_cycles(g, a))


# -- distances ---------------------------------------------------------------------


def _set_dist(g, src, dst, cap: float = np.inf) -> float:
    src, dst = set(src), set(dst)
    if src & dst:
        return 0
    dist = {v: 0 for v in src}
    frontier = list(src)
    d = 0
    while frontier and d < cap:
        d += 1
        nxt = []
        for u in frontier:
            for w in g.neighbors(u):
                if w in dst:
                    return d
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return np.inf


def _core_set(g, cfg: GameConfig) -> set[int]:
    return set(range(1, min(cfg.N0, g.n) + 1))


def _far_family(g, copies: list[frozenset[int]], need: int, gap: int,
                from_set: set[int]) -> list[int] | None:
    """Indices of `need` copies pairwise >= gap apart and >= gap from from_set;
    exhaustive with pruning (candidate lists are small at test scale)."""
    ok_idx = [i for i, c in enumerate(copies)
              if not from_set or _set_dist(g, c, from_set, cap=gap) >= gap]

    chosen: list[int] = []

    def search(start: int) -> bool:
        if len(chosen) == need:
            return True
        for i in range(start, len(ok_idx)):
            ci = copies[ok_idx[i]]
            if all(_set_dist(g, ci, copies[cj], cap=gap) >= gap for cj in chosen):
                chosen.append(ok_idx[i])
                if search(i + 1):
                    return True
                chosen.pop()
        return False

    if search(0):
        return chosen
    return None


# -- Q1 / Q2 ------------------------------------------------------------------------


@dataclass
class PropertyReport:
    ok: bool
    clause: str | None = None
    witness: object = None

    def __bool__(self) -> bool:
        return self.ok


def check_Q1(g, cfg: GameConfig,
             summary: StructureSummary | None = None) -> PropertyReport:
    """The four clauses: far-apart cycles outside [n0]; everything beyond [N0]
    far from [n0]; saturated [N0]; and R far-apart copies of every realized
    tree ball type (per strategy radius) and complete a-graph type."""
    a = cfg.a
    summary = summary or summarize_structure(g, cfg)

    outside = [rec for rec in summary.cycles
               if rec.length <= a and rec.min_vertex > cfg.n0]
    for c1, c2 in combinations(outside, 2):
        if _set_dist(g, c1.vertices, c2.vertices, cap=3 * a) < 3 * a:
            return PropertyReport(False, "1", (c1.vertices, c2.vertices))

    n0set = set(range(1, min(cfg.n0, g.n) + 1))
    if n0set:
        dist = {v: 0 for v in n0set}
        frontier = list(n0set)
        depth = 0
        while frontier and depth < 3 * a - 1:
            depth += 1
            nxt = []
            for u in frontier:
                for w in g.neighbors(u):
                    if w not in dist:
                        dist[w] = depth
                        nxt.append(w)
            frontier = nxt
        for v, dv in dist.items():
            if v > cfg.N0 and dv < 3 * a:
                return PropertyReport(False, "2", v)

    for v in range(1, min(cfg.N0, g.n) + 1):
        if g.degree(v) != cfg.d:
            return PropertyReport(False, "3", v)

    core = _core_set(g, cfg)
    for radius, idx in summary.tree_types.items():
        for code, roots in idx.roots_by_code.items():
            copies = [idx.ball_of_root[r] for r in roots]
            if _far_family(g, copies, cfg.R, a, core) is None:
                return PropertyReport(False, "4", ("tree", radius, code))
    complete_a = {}
    for copy in summary.a_graphs:
        if copy.complete:
            complete_a.setdefault(copy.code, []).append(copy.ball_vertices)
    for code, copies in complete_a.items():
        if _far_family(g, copies, cfg.R, a, core) is None:
            return PropertyReport(False, "4", ("complete-a-graph", code))
    return PropertyReport(True)


def check_Q2(g1, g2, cfg: GameConfig,
             summary1: StructureSummary | None = None,
             summary2: StructureSummary | None = None) -> PropertyReport:
    """Non-complete a-graph types realized in either graph: counts equal, or
    R far-apart copies far from [N0] in both."""
    if g1.n <= g2.n:
        raise ValueError("need n1 > n2")
    if g2.n <= cfg.N0:
        raise ValueError("need n2 > N0")
    core = min(cfg.N0, g2.n)
    e1 = {(u, v) for u, v in ((min(e), max(e)) for e in g1.edges())
          if v <= core}
    e2 = {(u, v) for u, v in ((min(e), max(e)) for e in g2.edges())
          if v <= core}
    if e1 != e2:
        raise ValueError("graphs disagree on [N0]")
    summary1 = summary1 or summarize_structure(g1, cfg)
    summary2 = summary2 or summarize_structure(g2, cfg)
    by_code_1: dict[str, list[UnicyclicCopy]] = {}
    by_code_2: dict[str, list[UnicyclicCopy]] = {}
    for c in summary1.a_graphs:
        if not c.complete:
            by_code_1.setdefault(c.code, []).append(c)
    for c in summary2.a_graphs:
        if not c.complete:
            by_code_2.setdefault(c.code, []).append(c)
    a = cfg.a
    for code in set(by_code_1) | set(by_code_2):
        n1 = len(by_code_1.get(code, []))
        n2 = len(by_code_2.get(code, []))
        if n1 == n2:
            continue
        fam1 = _far_family(g1, [c.ball_vertices for c in by_code_1.get(code, [])],
                           cfg.R, a, _core_set(g1, cfg))
        fam2 = _far_family(g2, [c.ball_vertices for c in by_code_2.get(code, [])],
                           cfg.R, a, _core_set(g2, cfg))
        if fam1 is None or fam2 is None:
            return PropertyReport(False, "count", (code, n1, n2))
    return PropertyReport(True)


def check_pair_tree_coverage(g1, g2, cfg: GameConfig,
                             summary1: StructureSummary,
                             summary2: StructureSummary) -> PropertyReport:
    """Every tree ball type realized in either graph has R far-apart copies in
    both (the strategy transfers such balls across graphs)."""
    a = cfg.a
    for radius in sorted(set(cfg.radii)):
        idx1 = summary1.tree_types[radius]
        idx2 = summary2.tree_types[radius]
        for code in set(idx1.roots_by_code) | set(idx2.roots_by_code):
            for g, idx in ((g1, idx1), (g2, idx2)):
                copies = [idx.ball_of_root[r]
                          for r in idx.roots_by_code.get(code, [])]
                if _far_family(g, copies, cfg.R, a, _core_set(g, cfg)) is None:
                    return PropertyReport(False, "tree-coverage", (radius, code))
    return PropertyReport(True)


# -- ball isomorphisms ---------------------------------------------------------------


def tree_ball_iso(g1, root1: int, g2, root2: int, radius: int) -> dict[int, int]:
    """Root-to-root isomorphism of two acyclic balls with equal codes, built
    by matching children sorted by subtree code."""
    b1, b2 = ball(g1, root1, radius), ball(g2, root2, radius)

    def kids(g, b, v):
        return [w for w in g.neighbors(v)
                if w in b.depths and b.depths[w] == b.depths[v] + 1]

    def sub_code(g, b, v) -> str:
        ks = sorted(sub_code(g, b, w) for w in kids(g, b, v))
        return "(" + "".join(ks) + ")"

    phi: dict[int, int] = {}

    def match(v, w):
        phi[v] = w
        ks1 = sorted(kids(g1, b1, v), key=lambda x: sub_code(g1, b1, x))
        ks2 = sorted(kids(g2, b2, w), key=lambda x: sub_code(g2, b2, x))
        if len(ks1) != len(ks2):
            raise ValueError("ball codes do not match")
        for x, y in zip(ks1, ks2):
            if sub_code(g1, b1, x) != sub_code(g2, b2, y):
                raise ValueError("ball codes do not match")
            match(x, y)

    match(root1, root2)
    return phi


def find_induced_iso(g1, verts1, g2, verts2, pins: dict[int, int],
                     budget: int = 2_000_00) -> dict[int, int] | None:
    """Backtracking isomorphism of induced subgraphs extending `pins`."""
    v1 = sorted(verts1)
    v2 = sorted(verts2)
    if len(v1) != len(v2):
        return None
    s1 = {v: {w for w in g1.neighbors(v) if w in verts1} for v in v1}
    s2 = {v: {w for w in g2.neighbors(v) if w in verts2} for v in v2}
    for a, b in pins.items():
        if len(s1[a]) != len(s2[b]):
            return None
    order = sorted(v1, key=lambda v: (v not in pins, -len(s1[v])))
    phi: dict[int, int] = {}
    used: set[int] = set()
    steps = [0]

    def bt(i: int) -> bool:
        steps[0] += 1
        if steps[0] > budget:
            raise RuntimeError("isomorphism search budget exceeded")
        if i == len(order):
            return True
        v = order[i]
        cands = [pins[v]] if v in pins else [w for w in v2 if w not in used
                                             and len(s2[w]) == len(s1[v])]
        for w in cands:
            if w in used:
                continue
            ok = True
            for pv, pw in phi.items():
                if (pv in s1[v]) != (pw in s2[w]):
                    ok = False
                    break
            if ok:
                phi[v] = w
                used.add(w)
                if bt(i + 1):
                    return True
                del phi[v]
                used.discard(w)
        return False

    if bt(0):
        return phi
    return None


# -- the Duplicator strategy -----------------------------------------------------------


@dataclass
class RoundRecord:
    side: int                 # graph Spoiler moved in (0 or 1)
    p: tuple[int, int]        # (vertex in g1, vertex in g2)
    kernel_sets: tuple[frozenset[int], frozenset[int]]
    cert_domain: frozenset[int]      # ball in g1
    cert_map: dict[int, int]         # iso onto the g2-side ball


@dataclass
class MatchState:
    rounds: list[RoundRecord] = field(default_factory=list)

    @property
    def round_index(self) -> int:
        return len(self.rounds) + 1

    def pebbles(self, side: int) -> list[int]:
        return [r.p[side] for r in self.rounds]


class DuplicatorStrategy:
    """The three-case reply rule, with preconditions verified once."""

    def __init__(self, g1, g2, cfg: GameConfig, verify: bool = True,
                 summaries=None):
        self.g = (g1, g2)
        self.cfg = cfg
        self.summaries = summaries or (summarize_structure(g1, cfg),
                                       summarize_structure(g2, cfg))
        if verify:
            q1a = check_Q1(g1, cfg, self.summaries[0])
            q1b = check_Q1(g2, cfg, self.summaries[1])
            big, small = (0, 1) if g1.n > g2.n else (1, 0)
            q2 = check_Q2(self.g[big], self.g[small], cfg,
                          self.summaries[big], self.summaries[small])
            cov = check_pair_tree_coverage(g1, g2, cfg, *self.summaries)
            for name, rep in (("Q1(G1)", q1a), ("Q1(G2)", q1b), ("Q2", q2),
                              ("coverage", cov)):
                if not rep:
                    raise ValueError(f"{name} fails: clause {rep.clause}, "
                                     f"witness {rep.witness}")
        self.state = MatchState()

    def fresh(self) -> "DuplicatorStrategy":
        """New match on the same verified pair (summaries shared)."""
        return DuplicatorStrategy(*self.g, self.cfg, verify=False,
                                  summaries=self.summaries)

    # -- helpers --

    def _kernels_near(self, side: int, v: int, radius: int) -> frozenset[int]:
        g = self.g[side]
        ks = [c.kernel for c in self.summaries[side].kernels_2r
              if _set_dist(g, {v}, c.kernel, cap=radius + 1) <= radius]
        assert len(ks) <= 1, "Q1 guarantees at most one nearby kernel"
        out: set[int] = set()
        for k in ks:
            out.update(k)
        return frozenset(out)

    def _prior_ball_blocked(self, side: int, verts) -> bool:
        g = self.g[side]
        a = self.cfg.a
        for j, rec in enumerate(self.state.rounds, start=1):
            prior = ball(self.g[side], set([rec.p[side]]) | set(rec.kernel_sets[side]),
                         self.cfg.radius(j)).vertices
            if _set_dist(g, verts, prior, cap=a) < a:
                return True
        return False

    def reply(self, side: int, x: int) -> int:
        """Answer Spoiler's move `x` in graph `side`; returns the reply vertex
        in the other graph and records the round certificate."""
        cfg = self.cfg
        i = self.state.round_index
        if i > cfg.R:
            raise ValueError("match is over")
        rho = cfg.radius(i)
        gs, gd = self.g[side], self.g[1 - side]
        xker = self._kernels_near(side, x, rho)

        y, phi_core = self._choose_reply(side, x, rho, xker, i)
        yker = self._kernels_near(1 - side, y, rho)

        dom = ball(gs, set(xker) | {x}, rho).vertices
        img = ball(gd, set(yker) | {y}, rho).vertices
        pins = dict(phi_core)
        pins[x] = y
        for rec in self.state.rounds:
            ps, pd = rec.p[side], rec.p[1 - side]
            if ps in dom:
                pins[ps] = pd
        pins = {k: v for k, v in pins.items() if k in dom}
        phi = find_induced_iso(gs, dom, gd, img, pins)
        if phi is None:
            raise RuntimeError(
                f"round {i}: no certificate isomorphism; Q1/Q2 verification bug")
        if side == 0:
            p = (x, y)
            kernel_sets = (xker, yker)
            cert_domain, cert_map = frozenset(dom), phi
        else:
            p = (y, x)
            kernel_sets = (yker, xker)
            cert_domain = frozenset(img)
            cert_map = {w: v for v, w in phi.items()}
        self.state.rounds.append(RoundRecord(side=side, p=p,
                                             kernel_sets=kernel_sets,
                                             cert_domain=cert_domain,
                                             cert_map=cert_map))
        return y

    def _choose_reply(self, side, x, rho, xker, i):
        cfg = self.cfg
        gs, gd = self.g[side], self.g[1 - side]
        n0set = set(range(1, min(cfg.n0, gs.n) + 1))

        # case 1: close to the initial segment -> copy the vertex
        if n0set and _set_dist(gs, {x}, n0set, cap=rho + 1) <= rho:
            return x, {}

        # case 2: inside the ball of an earlier round -> map through it
        best_j = None
        dom_i = ball(gs, set(xker) | {x}, rho).vertices
        for j in range(len(self.state.rounds), 0, -1):
            rec = self.state.rounds[j - 1]
            if rec.p[side] in dom_i:
                best_j = j
                break
        if best_j is not None:
            rec = self.state.rounds[best_j - 1]
            cert = rec.cert_map if side == 0 else \
                {w: v for v, w in rec.cert_map.items()}
            if x in cert:
                return cert[x], {}
            raise RuntimeError(
                f"round {i}: prior certificate does not cover the move "
                f"(ball inclusion failed)")

        # case 3: fresh territory
        if xker:
            return self._transfer_unicyclic(side, x, rho, xker, i)
        return self._transfer_tree(side, x, rho, i)

    def _transfer_unicyclic(self, side, x, rho, xker, i):
        cfg = self.cfg
        gs, gd = self.g[side], self.g[1 - side]
        mine = next(c for c in self.summaries[side].kernels_2r
                    if set(c.kernel) <= set(xker))
        n0_s = set(range(1, min(cfg.n0, gs.n) + 1))
        n0_d = set(range(1, min(cfg.n0, gd.n) + 1))
        my_dist = _set_dist(gs, mine.kernel, n0_s) if n0_s else np.inf
        cands = []
        for c in self.summaries[1 - side].kernels_2r:
            if c.code != mine.code:
                continue
            kd = _set_dist(gd, c.kernel, n0_d) if n0_d else np.inf
            if not (kd >= my_dist or kd >= 2 ** cfg.R):
                continue
            if self._violates_prior_cycles(1 - side, c):
                continue
            cands.append(c)
        if not cands:
            raise RuntimeError(f"round {i}: no matching far unicyclic copy; "
                               f"Q1/Q2 verification bug")
        target = min(cands, key=lambda c: min(c.kernel))
        pins = {}
        phi = find_induced_iso(gs, mine.ball_vertices, gd, target.ball_vertices, pins)
        if phi is None or phi.get(x) is None:
            raise RuntimeError(f"round {i}: unicyclic copies not isomorphic")
        y = phi[x]
        if n0_d and _set_dist(gd, {y}, n0_d, cap=rho + 1) <= rho:
            raise RuntimeError(f"round {i}: transferred vertex lands near [n0]")
        return y, {v: w for v, w in phi.items()}

    def _violates_prior_cycles(self, dup_side, copy: UnicyclicCopy) -> bool:
        g = self.g[dup_side]
        cfg = self.cfg
        two_r = 2 ** cfg.R
        for j, rec in enumerate(self.state.rounds, start=1):
            yj = rec.p[dup_side]
            rj = cfg.radius(j)
            near_cycles = [c for c in self.summaries[dup_side].cycles
                           if c.length <= two_r and
                           _set_dist(g, {yj}, c.vertices, cap=rj + 1) <= rj]
            if near_cycles:
                for c in near_cycles:
                    if _set_dist(g, copy.ball_vertices, c.vertices,
                                 cap=2 * cfg.a) < 2 * cfg.a:
                        return True
            else:
                if _set_dist(g, copy.kernel, {yj}, cap=rj + 1) <= rj:
                    return True
        return False

    def _transfer_tree(self, side, x, rho, i):
        cfg = self.cfg
        gs, gd = self.g[side], self.g[1 - side]
        got = _acyclic_ball_code(gs, x, rho)
        if got is None:
            raise RuntimeError(
                f"round {i}: fresh move has a cyclic ball but no nearby "
                f"non-complete kernel; complete-unicyclic transfer required")
        code, _ = got
        idx = self.summaries[1 - side].tree_types[rho]
        core_d = _core_set(gd, cfg)
        cands = []
        for w in idx.roots_by_code.get(code, []):
            bw = idx.ball_of_root[w]
            if core_d and _set_dist(gd, bw, core_d, cap=cfg.a) < cfg.a:
                continue
            if self._prior_ball_blocked(1 - side, bw):
                continue
            cands.append(w)
        if not cands:
            raise RuntimeError(f"round {i}: no far tree copy of the realized "
                               f"type; Q1 coverage bug")
        w = min(cands)
        phi = tree_ball_iso(gs, x, gd, w, rho)
        return w, phi


def duplicator_move(strategy: DuplicatorStrategy, side: int, vertex: int) -> int:
    """Functional wrapper: answer one Spoiler move with the stored state."""
    return strategy.reply(side, vertex)


def partial_map_is_isomorphism(g1, g2, state: MatchState) -> bool:
    xs = state.pebbles(0)
    ys = state.pebbles(1)
    a1, a2 = _Adj(g1), _Adj(g2)
    for i in range(len(xs)):
        for j in range(i):
            if (xs[i] == xs[j]) != (ys[i] == ys[j]):
                return False
            if (xs[j] in a1.sets[xs[i]]) != (ys[j] in a2.sets[ys[i]]):
                return False
    return True
