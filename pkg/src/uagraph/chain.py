"""The unicyclic-count Markov chain: the time-inhomogeneous process S(n), its
embedded time-homogeneous jump chain S'(t), limit-distribution estimation,
constants derived from tree densities, and graph-vs-chain comparisons.

Transitions of S(n) on Z_+^K (creation of a non-complete type, conversion of
a smaller type into a larger one by a single attachment, and completion of
the largest type) all carry probability rate/n; the embedded chain divides
the same rates by their sum D(S). K indexes the non-complete types from the
smallest to the largest; the largest converts to the complete type at rate
c_out per object, with c_out = m/(1 - rho_d) (one edge into its unique open
vertex; the per-vertex attachment rate is m/((1 - rho_d) n)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product as iter_product

import numpy as np

from .cycles import unicyclic_code
from .degrees import solve_rho
from .ensemble import grow_ensemble, unicyclic_census_from_triangles
from .trees import code_string, solve_tree_fixed_point


@dataclass
class ChainSpec:
    K: int
    c: np.ndarray                # creation rates, c[0] > 0
    c_pair: np.ndarray           # (K, K); c_pair[j, i] > 0 only for j < i
    c_out: float
    codes: list[str] | None = None   # census type codes aligned with indices
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.c_pair = np.asarray(self.c_pair, dtype=float).reshape(self.K, self.K)
        if self.c.shape != (self.K,):
            raise ValueError("c must have length K")
        if np.any(self.c < 0) or np.any(self.c_pair < 0) or self.c_out <= 0:
            raise ValueError("rates must be non-negative with c_out > 0")
        if self.c[0] <= 0:
            raise ValueError("the smallest type must have a positive creation rate")
        if np.any(np.tril(self.c_pair) != 0):
            raise ValueError("c_pair must be strictly upper triangular (j < i)")
        self._check_connectivity()

    def _check_connectivity(self) -> None:
        k = self.K
        # forward: every i reachable from 0 through positive conversions
        reach = {0}
        frontier = [0]
        while frontier:
            j = frontier.pop()
            for i in range(j + 1, k):
                if self.c_pair[j, i] > 0 and i not in reach:
                    reach.add(i)
                    frontier.append(i)
        if reach != set(range(k)):
            missing = sorted(set(range(k)) - reach)
            raise ValueError(f"types {missing} unreachable from the smallest type")
        # backward: K-1 reachable from every j
        reach_k = {k - 1}
        changed = True
        while changed:
            changed = False
            for j in range(k - 1):
                if j not in reach_k and any(
                        self.c_pair[j, i] > 0 and i in reach_k for i in range(j + 1, k)):
                    reach_k.add(j)
                    changed = True
        if reach_k != set(range(k)):
            missing = sorted(set(range(k)) - reach_k)
            raise ValueError(f"the largest type is unreachable from types {missing}")

    def rate_sum(self, s) -> float:
        s = np.asarray(s, dtype=float)
        return float(self.c.sum() + s @ self.c_pair.sum(axis=1) + self.c_out * s[-1])

    def to_json(self) -> str:
        return json.dumps({
            "K": self.K,
            "c": self.c.tolist(),
            "c_pair": self.c_pair.tolist(),
            "c_out": self.c_out,
            "codes": self.codes,
            "meta": self.meta,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        raw = json.loads(text)
        return cls(K=raw["K"], c=np.array(raw["c"]), c_pair=np.array(raw["c_pair"]),
                   c_out=raw["c_out"], codes=raw.get("codes"),
                   meta=raw.get("meta", {}))


@dataclass
class ChainState:
    s: tuple[int, ...]
    n: int


def _events(spec: ChainSpec, s) -> list[tuple[float, int, int]]:
    """(rate, j, i) event list: j = -1 creation of i; i = -1 removal from K."""
    out = []
    for i in range(spec.K):
        if spec.c[i] > 0:
            out.append((float(spec.c[i]), -1, i))
    for j in range(spec.K):
        if s[j] <= 0:
            continue
        for i in range(j + 1, spec.K):
            if spec.c_pair[j, i] > 0:
                out.append((float(spec.c_pair[j, i] * s[j]), j, i))
    if s[spec.K - 1] > 0:
        out.append((float(spec.c_out * s[spec.K - 1]), spec.K - 1, -1))
    return out


def _apply(s: tuple[int, ...], j: int, i: int) -> tuple[int, ...]:
    out = list(s)
    if j >= 0:
        out[j] -= 1
    if i >= 0:
        out[i] += 1
    return tuple(out)


def inhomogeneous_probabilities(state: ChainState, spec: ChainSpec):
    """σ-list [(probability, next state)] including the hold move."""
    events = _events(spec, state.s)
    total = sum(r for r, _, _ in events) / state.n
    if total > 1.0:
        raise ValueError(
            f"transition probabilities sum to {total} > 1 at n={state.n}; "
            f"start the chain at a larger n")
    moves = [(r / state.n, _apply(state.s, j, i)) for r, j, i in events]
    moves.append((1.0 - total, state.s))
    return moves


def embedded_probabilities(spec: ChainSpec, s):
    """Jump-chain move list [(probability, next state)]; D(s) > 0 since c_1 > 0."""
    events = _events(spec, s)
    d_total = sum(r for r, _, _ in events)
    return [(r / d_total, _apply(s, j, i)) for r, j, i in events]


def step_inhomogeneous(state: ChainState, spec: ChainSpec,
                       rng: np.random.Generator) -> ChainState:
    """One transition of S(n) drawn exactly from the four-case transition list."""
    moves = inhomogeneous_probabilities(state, spec)
    u = rng.random()
    acc = 0.0
    for p, s_next in moves:
        acc += p
        if u < acc:
            return ChainState(s=s_next, n=state.n + 1)
    return ChainState(s=moves[-1][1], n=state.n + 1)


def step_embedded(state: ChainState, spec: ChainSpec,
                  rng: np.random.Generator) -> ChainState:
    """One jump of the embedded chain S'(t): the same rates divided by D(S')."""
    moves = embedded_probabilities(spec, state.s)
    u = rng.random()
    acc = 0.0
    for p, s_next in moves:
        acc += p
        if u < acc:
            return ChainState(s=s_next, n=state.n + 1)
    return ChainState(s=moves[-1][1], n=state.n + 1)


# -- empirical distributions ---------------------------------------------------


@dataclass
class EmpiricalDistribution:
    counts: dict[tuple, float]
    total: float

    @classmethod
    def from_states(cls, states) -> "EmpiricalDistribution":
        counts: dict[tuple, float] = {}
        total = 0
        for s in states:
            key = tuple(s)
            counts[key] = counts.get(key, 0) + 1
            total += 1
        return cls(counts=counts, total=float(total))

    @classmethod
    def from_probabilities(cls, probs: dict) -> "EmpiricalDistribution":
        return cls(counts=dict(probs), total=float(sum(probs.values())))

    def probabilities(self) -> dict[tuple, float]:
        out = {k: v / self.total for k, v in self.counts.items()}
        assert abs(sum(out.values()) - 1.0) <= 1e-12
        return out

    def tv(self, other: "EmpiricalDistribution") -> float:
        p = self.probabilities()
        q = other.probabilities()
        keys = set(p) | set(q)
        return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)

    def truncate(self, box) -> "EmpiricalDistribution":
        """Project states coordinatewise onto the box (tail mass lands on the
        boundary)."""
        box = tuple(box)
        counts: dict[tuple, float] = {}
        for k, v in self.counts.items():
            key = tuple(min(x, b) for x, b in zip(k, box))
            counts[key] = counts.get(key, 0.0) + v
        return EmpiricalDistribution(counts=counts, total=self.total)


@dataclass
class SimulationResult:
    distribution: EmpiricalDistribution
    batches: list[EmpiricalDistribution]
    batch_tv: float
    n_start: int
    n_end: int
    replicas: int


def simulate_limit(spec: ChainSpec, n_start: int, n_end: int, replicas: int,
                   seed: int = 0, batches: int = 2) -> SimulationResult:
    """Distribution of S(n_end) across replicas, grown in lockstep from
    S(n_start) = 0. Replicas split into disjoint seed batches; the TV distance
    between batch distributions is a self-consistency figure."""
    if replicas < batches:
        raise ValueError("need at least one replica per batch")
    sizes = [replicas // batches + (1 if b < replicas % batches else 0)
             for b in range(batches)]
    dists = []
    all_states: list[tuple] = []
    for b, size in enumerate(sizes):
        rng = np.random.default_rng(np.random.SeedSequence([seed, b]))
        states = _simulate_block(spec, n_start, n_end, size, rng)
        all_states.extend(states)
        dists.append(EmpiricalDistribution.from_states(states))
    tv = dists[0].tv(dists[1]) if len(dists) >= 2 else 0.0
    return SimulationResult(distribution=EmpiricalDistribution.from_states(all_states),
                            batches=dists, batch_tv=tv, n_start=n_start,
                            n_end=n_end, replicas=replicas)


def _simulate_block(spec: ChainSpec, n_start: int, n_end: int, r: int,
                    rng: np.random.Generator) -> list[tuple]:
    """Lockstep simulation: one uniform per replica per step decides whether
    any event fires (probability D(S)/n); the rare hits draw the event type.
    Identical in law to stepping step_inhomogeneous replica by replica."""
    k = spec.K
    s = np.zeros((r, k), dtype=np.int64)
    w = spec.c_pair.sum(axis=1)
    w[k - 1] += spec.c_out
    c_sum = float(spec.c.sum())
    for n in range(n_start, n_end):
        d_tot = c_sum + s @ w
        if np.any(d_tot > n):
            raise ValueError(
                f"transition probabilities sum above 1 at n={n}; "
                f"start the chain at a larger n")
        u = rng.random(r) * n
        hits = np.nonzero(u < d_tot)[0]
        for idx in hits:
            target = u[idx]
            row = s[idx]
            acc = 0.0
            done = False
            for i in range(k):
                acc += spec.c[i]
                if target < acc:
                    row[i] += 1
                    done = True
                    break
            if done:
                continue
            for j in range(k):
                if row[j] <= 0:
                    continue
                for i in range(j + 1, k):
                    cp = spec.c_pair[j, i]
                    if cp > 0:
                        acc += cp * row[j]
                        if target < acc:
                            row[j] -= 1
                            row[i] += 1
                            done = True
                            break
                if done:
                    break
            if not done:
                row[k - 1] -= 1
    return [tuple(int(x) for x in row) for row in s]


def stationary_truncated(spec: ChainSpec, box, tol: float = 1e-12,
                         max_iter: int = 200_000) -> EmpiricalDistribution:
    """Stationary distribution of the embedded chain restricted to a finite
    box (moves leaving the box become self-loops). Damped power iteration;
    the plain operator can be periodic (birth-death chains alternate parity).
    """
    box = tuple(int(b) for b in box)
    states = list(iter_product(*(range(b + 1) for b in box)))
    if len(states) > 200_000:
        raise ValueError("truncation box too large")
    index = {st: i for i, st in enumerate(states)}
    size = len(states)
    p_mat = np.zeros((size, size))
    for st, i in index.items():
        for prob, nxt in embedded_probabilities(spec, st):
            j = index.get(tuple(nxt), i)  # reflecting: out-of-box stays put
            p_mat[i, j] += prob
    pi = np.full(size, 1.0 / size)
    for it in range(max_iter):
        nxt = 0.5 * pi + 0.5 * (pi @ p_mat)
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise RuntimeError(f"power iteration did not converge in {max_iter} steps")
    return EmpiricalDistribution.from_probabilities(
        {st: float(p) for st, p in zip(states, pi) if p > 0})


# -- constants from the graph model ---------------------------------------------


def completion_rate(m: int, d: int) -> float:
    """Rate at which the last open vertex of the largest non-complete type
    saturates: one edge at per-vertex attachment rate m/((1-rho_d) n)."""
    fp = solve_rho(m, d)
    return m / (1.0 - float(fp.rho[-1]))


def _degree_multiset_code(degrees: tuple[int, ...]) -> str:
    hang = [code_string(tuple([()] * (g - 2))) for g in degrees]
    return unicyclic_code(3, 1, hang)


def derive_constants(m: int, d: int, ell: int = 3, k: int = 1,
                     guard: int = 5000) -> ChainSpec:
    """ChainSpec for the (ell=3, depth-1) unicyclic census of G(m, d).

    Supported for m = 2 (triangles are created by the two edges of one
    arrival; for m = 1 the graph is acyclic and the chain is degenerate).
    Types are degree multisets {g1, g2, g3} of the cycle vertices; creation
    rates come from the density of open adjacent degree pairs (read off the
    depth-2 tree densities), conversions bump one open cycle degree, and the
    completion rate is m/(1-rho_d).
    """
    if ell != 3:
        raise ValueError("constants are derived for ell=3 only; "
                         "supply a ChainSpec config for longer cycles")
    if k != 1:
        raise ValueError("constants are derived for depth k=1 only; "
                         "supply a ChainSpec config for other depths")
    if m == 1:
        raise ValueError("m=1 graphs are acyclic: the unicyclic chain is "
                         "degenerate and has no valid spec")
    if m != 2:
        raise ValueError("creation rates are implemented for m=2 (triangle "
                         "creation by a single arrival's two edges)")

    tfp = solve_tree_fixed_point(m, d, 2, guard=guard)
    fp = tfp.degree_fixed_point
    one_minus = 1.0 - float(fp.rho[-1])
    layer2 = tfp.layers[2]

    # ordered open-edge incidence pi[s, u]: density of (root deg s, child deg u)
    pi = np.zeros((d + 1, d + 1))
    for t, z in zip(layer2.types, layer2.densities):
        s_deg = t.root_degree
        if s_deg >= d:
            continue
        for kid in t.structure:
            u_deg = len(kid) + 1
            if u_deg < d:
                pi[s_deg, u_deg] += z
    if np.max(np.abs(pi - pi.T)) > 1e-9:
        raise RuntimeError("edge incidence table is not symmetric")

    def edge_density(s_deg: int, u_deg: int) -> float:
        return pi[s_deg, u_deg] if s_deg != u_deg else pi[s_deg, u_deg] / 2.0

    # creations: a new vertex hits an open adjacent pair with degrees (s, u)
    creations: dict[tuple[int, ...], float] = {}
    for s_deg in range(m, d):
        for u_deg in range(s_deg, d):
            dens = edge_density(s_deg, u_deg)
            if dens <= 0:
                continue
            tri = tuple(sorted((2, s_deg + 1, u_deg + 1)))
            creations[tri] = creations.get(tri, 0.0) + \
                m * (m - 1) * dens / one_minus ** 2

    # reachable closure under single-degree bumps
    complete = (d, d, d)
    reached = set(creations)
    frontier = list(creations)
    while frontier:
        tri = frontier.pop()
        for pos in set(tri):
            if pos >= d:
                continue
            nxt = tuple(sorted(t + 1 if idx == tri.index(pos) else t
                               for idx, t in enumerate(tri)))
            if nxt != complete and nxt not in reached:
                reached.add(nxt)
                frontier.append(nxt)

    ordered = sorted(reached, key=lambda t: (sum(t), t))
    index = {t: i for i, t in enumerate(ordered)}
    big_k = len(ordered)
    c = np.zeros(big_k)
    for tri, rate in creations.items():
        c[index[tri]] = rate
    c_pair = np.zeros((big_k, big_k))
    for tri, j in index.items():
        for g in sorted(set(tri)):
            if g >= d:
                continue
            mult = tri.count(g)
            pos = tri.index(g)
            nxt = tuple(sorted(t + 1 if idx == pos else t
                               for idx, t in enumerate(tri)))
            rate = mult * m / one_minus
            if nxt == complete:
                continue  # accounted by c_out on the largest type
            c_pair[j, index[nxt]] = rate
    c_out = m / one_minus
    # sanity: the largest type has exactly one open vertex
    assert ordered[-1] == tuple(sorted((d, d, d - 1)))
    codes = [_degree_multiset_code(t) for t in ordered]
    return ChainSpec(K=big_k, c=c, c_pair=c_pair, c_out=c_out, codes=codes,
                     meta={"m": m, "d": d, "ell": ell, "k": k})


# -- graph-side distributions and the comparison ---------------------------------


def state_key(noncomplete_counts: dict[str, int]) -> tuple:
    return tuple(sorted((code, cnt) for code, cnt in noncomplete_counts.items()
                        if cnt > 0))


def graph_count_distribution(m: int, d: int, ell: int, k: int, n: int,
                             replicas: int, seed: int = 0, checkpoints=(),
                             chunk_size: int | None = None):
    """Per-checkpoint empirical distribution of the non-complete unicyclic
    count vector, plus the complete counts, from independent graph runs."""
    if ell != 3:
        raise ValueError("the distribution experiment is implemented for ell=3")
    kwargs = {} if chunk_size is None else {"chunk_size": chunk_size}
    res = grow_ensemble(m, d, n, replicas, seed=seed,
                        checkpoints=list(checkpoints) + [n],
                        track_triangles=True, phases=k + 1, **kwargs)
    out = {}
    for cp in res.checkpoints:
        states = []
        completes = []
        for td in res.triangles:
            cen = unicyclic_census_from_triangles(td, cp, k, d)
            states.append(state_key(cen.noncomplete_vector()))
            completes.append(cen.complete_count)
        out[cp] = (EmpiricalDistribution.from_states(states), completes)
    return out


def chain_distribution_keyed(spec: ChainSpec, result: SimulationResult
                             ) -> EmpiricalDistribution:
    """Re-key a chain distribution by census type codes for graph comparison."""
    if spec.codes is None:
        raise ValueError("spec carries no census codes")
    counts: dict[tuple, float] = {}
    for st, cnt in result.distribution.counts.items():
        key = tuple(sorted((spec.codes[i], int(v))
                           for i, v in enumerate(st) if v > 0))
        counts[key] = counts.get(key, 0.0) + cnt
    return EmpiricalDistribution(counts=counts, total=result.distribution.total)


def total_count_marginal(dist: EmpiricalDistribution) -> EmpiricalDistribution:
    """Distribution of the total non-complete count (sum over types)."""
    out: dict[tuple, float] = {}
    for key, cnt in dist.counts.items():
        t = sum(c for _, c in key)
        out[(t,)] = out.get((t,), 0.0) + cnt
    return EmpiricalDistribution(counts=out, total=dist.total)


def type_marginal(dist: EmpiricalDistribution, code: str) -> EmpiricalDistribution:
    out: dict[tuple, float] = {}
    for key, cnt in dist.counts.items():
        v = dict(key).get(code, 0)
        out[(v,)] = out.get((v,), 0.0) + cnt
    return EmpiricalDistribution(counts=out, total=dist.total)


def embedded_occupation(spec: ChainSpec, steps: int, seed: int = 0,
                        burn_in: int = 0) -> EmpiricalDistribution:
    """Occupation measure of the embedded chain over a long run (its long-run
    value is the jump-chain stationary law)."""
    rng = np.random.default_rng(seed)
    state = ChainState(s=tuple([0] * spec.K), n=0)
    counts: dict[tuple, float] = {}
    for t in range(steps):
        state = step_embedded(state, spec, rng)
        if t >= burn_in:
            counts[state.s] = counts.get(state.s, 0.0) + 1
    return EmpiricalDistribution(counts=counts, total=float(steps - burn_in))


@dataclass
class CompareReport:
    """Graph-vs-chain comparison.

    With ~500 occupied joint states at feasible replica counts, the raw joint
    TV estimate has a sparsity floor near 0.3 even between two runs of the
    same chain; `noise_floor_tv` reports that same-law floor so the joint
    distance can be read against it. The marginal TVs (total count and the
    worst single type) are well estimated at these sample sizes.
    """

    m: int
    d: int
    ell: int
    k: int
    n: int
    replicas: int
    tv: float
    noise_floor_tv: float
    total_marginal_tv: float
    worst_type_marginal_tv: float
    complete_quantiles: dict[str, float]
    graph_distribution: EmpiricalDistribution
    chain_distribution: EmpiricalDistribution | None


def compare_graph_vs_chain(m: int, d: int, ell: int, k: int, n: int,
                           replicas: int, seed: int = 0,
                           spec: ChainSpec | None = None,
                           chain_n_start: int = 100) -> CompareReport:
    """TV distance between the graph's non-complete unicyclic count vector at
    time n and the chain's S(n), plus complete-count quantiles."""
    if m == 1:
        zero = EmpiricalDistribution.from_states([()])
        return CompareReport(m=m, d=d, ell=ell, k=k, n=n, replicas=replicas,
                             tv=0.0, noise_floor_tv=0.0, total_marginal_tv=0.0,
                             worst_type_marginal_tv=0.0,
                             complete_quantiles={"q50": 0.0},
                             graph_distribution=zero, chain_distribution=zero)
    graph_out = graph_count_distribution(m, d, ell, k, n, replicas, seed=seed)
    graph_dist, completes = graph_out[n]
    if spec is None:
        spec = derive_constants(m, d, ell, k)
    sim = simulate_limit(spec, chain_n_start, n, replicas, seed=seed + 1)
    floor_sim = simulate_limit(spec, chain_n_start, n, replicas, seed=seed + 2)
    chain_dist = chain_distribution_keyed(spec, sim)
    floor = chain_dist.tv(chain_distribution_keyed(spec, floor_sim))
    worst_marg = 0.0
    if spec.codes:
        for code in spec.codes:
            worst_marg = max(worst_marg, type_marginal(graph_dist, code).tv(
                type_marginal(chain_dist, code)))
    qs = np.quantile(np.array(completes, dtype=float), [0.05, 0.25, 0.5, 0.75, 0.95])
    quantiles = {f"q{int(q * 100):02d}": float(v)
                 for q, v in zip([0.05, 0.25, 0.5, 0.75, 0.95], qs)}
    return CompareReport(
        m=m, d=d, ell=ell, k=k, n=n, replicas=replicas,
        tv=graph_dist.tv(chain_dist), noise_floor_tv=floor,
        total_marginal_tv=total_count_marginal(graph_dist).tv(
            total_count_marginal(chain_dist)),
        worst_type_marginal_tv=worst_marg,
        complete_quantiles=quantiles,
        graph_distribution=graph_dist, chain_distribution=chain_dist)
