"""Acceptance suite: one test per criterion, each printing a PASS line with
the measured figures (run pytest -s to see them inline)."""

import math
import random
import time

import numpy as np

from helpers_efgame import CONFIG as EF_CONFIG
from helpers_efgame import pair_corpus
from uagraph.chain import (ChainSpec, EmpiricalDistribution, embedded_occupation,
                           graph_count_distribution, simulate_limit,
                           stationary_truncated)
from uagraph.cli import main as cli_main
from uagraph.degrees import (chernoff_bounds, chernoff_thresholds,
                             convergence_experiment, drift_field, solve_rho,
                             stability_report)
from uagraph.efgame import (DUPLICATOR, SPOILER, DuplicatorStrategy, ef_solve,
                            partial_map_is_isomorphism)
from uagraph.graph import SimpleGraph, new_seed_graph
from uagraph.manifest import sha256_file
from uagraph.trees import census_trees, solve_tree_fixed_point

GRID = [(m, d) for m in range(1, 5) for d in range(2 * m + 1, 2 * m + 7)]
RHO3_13 = (3 - math.sqrt(5)) / 2


def report(criterion, detail):
    print(f"[PASS] criterion {criterion}: {detail}")


def test_criterion_01_fixed_point_exactness():
    t0 = time.perf_counter()
    fp = solve_rho(1, 3)
    assert abs(fp.rho_of_degree(3) - RHO3_13) < 1e-10
    worst_sum, worst_res = 0.0, 0.0
    for m, d in GRID:
        fp = solve_rho(m, d)
        worst_sum = max(worst_sum, abs(float(np.sum(fp.rho)) - 1.0))
        worst_res = max(worst_res, float(np.max(np.abs(drift_field(fp.rho, m, d)))))
    elapsed = time.perf_counter() - t0
    assert worst_sum < 1e-9
    assert worst_res < 1e-9
    assert elapsed < 1.0
    report(1, f"rho_3(1,3) at 1e-10; grid sum residual {worst_sum:.2e}, "
              f"drift {worst_res:.2e}; {elapsed:.2f}s")


def test_criterion_02_stability():
    t0 = time.perf_counter()
    worst_top, worst_p, worst_q = 0.0, 0.0, 0.0
    for m, d in GRID:
        rep = stability_report(solve_rho(m, d))
        worst_top = max(worst_top, abs(rep.top_real_part + 1.0))
        worst_p = max(worst_p, abs(rep.p_at_minus_one))
        worst_q = max(worst_q, -float(np.min(rep.q_coefficients)))
    elapsed = time.perf_counter() - t0
    assert worst_top < 1e-6
    assert worst_p < 1e-9
    assert worst_q <= 1e-12
    assert elapsed < 1.0
    report(2, f"top eigenvalue -1 within {worst_top:.2e}; |P(-1)| <= {worst_p:.2e}; "
              f"Q coefficients >= -{worst_q:.2e}; {elapsed:.2f}s")


def test_criterion_03_degree_convergence():
    t0 = time.perf_counter()
    lines = []
    for m, d, seed in ((1, 3, 101), (2, 5, 202)):
        rep = convergence_experiment(m, d, [10**4, 10**5, 10**6], 20,
                                     seed=seed, jobs=2)
        errs = rep.max_errors[10**6]
        good = sum(1 for e in errs if e < 0.005)
        assert good >= 18, f"({m},{d}): only {good}/20 under 0.005"
        assert rep.slope <= -0.4, f"({m},{d}): slope {rep.slope}"
        lines.append(f"({m},{d}): {good}/20 under 0.005, slope {rep.slope:.3f}")
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    report(3, "; ".join(lines) + f"; {elapsed:.0f}s (budget 120s)")


def test_criterion_04_tree_densities():
    tfp = solve_tree_fixed_point(1, 3, 2)
    fp = solve_rho(1, 3)
    lay1 = tfp.layers[1]
    for t, z in zip(lay1.types, lay1.densities):
        assert abs(z - fp.rho_of_degree(t.root_degree)) < 1e-9
    table = tfp.table(2)
    worst = 0.0
    for seed in range(10):
        g = new_seed_graph(1, 3).grow(10**6 - 1, rng_seed=1000 + seed)
        cen = census_trees(g, 2)
        dev = max(abs(cen.fraction(code) - rho) for code, rho in table.items())
        worst = max(worst, dev)
    assert worst < 0.01
    report(4, f"layer-1 equals the degree fixed point at 1e-9; "
              f"worst empirical deviation over 10 seeds at n=1e6: {worst:.5f} < 0.01")


def test_criterion_05_cycle_counts():
    from uagraph.cycles import triangles_from_arrivals
    checkpoints = (10**3, 10**4, 10**5)
    counts = {n: [] for n in checkpoints}
    outside = 0
    runs = 100
    for seed in range(runs):
        g = new_seed_graph(2, 5).grow(10**5 - 2, rng_seed=3000 + seed)
        tris = triangles_from_arrivals(g)
        for n in checkpoints:
            counts[n].append(sum(1 for t in tris if t[0] <= n))
        if any(min(t) > 100 for t in tris):
            outside += 1
    means = [float(np.mean(counts[n])) for n in checkpoints]
    inc1 = means[1] - means[0]
    inc2 = means[2] - means[1]
    ratio = inc2 / inc1
    assert 1 / 3 <= ratio <= 3, f"increment ratio {ratio}"
    assert outside >= 0.95 * runs
    report(5, f"mean triangle counts {['%.1f' % x for x in means]}, "
              f"increment ratio {ratio:.2f} in [1/3, 3]; "
              f"triangle outside [100] in {outside}/{runs} runs")


def test_criterion_06_chernoff_bounds():
    p, k, n = 1.0, 2, 10**4
    trials = 10**5
    rng = np.random.default_rng(606)
    s = np.zeros(trials)
    for i in range(k, n + 1):
        s += rng.random(trials) < p / i
    details = []
    for delta in (0.3, 0.5):
        lo_thr, hi_thr = chernoff_thresholds(p, k, n, delta)
        lo_bound, hi_bound = chernoff_bounds(p, k, n, delta)
        emp_lo = float(np.mean(s <= lo_thr))
        emp_hi = float(np.mean(s >= hi_thr))
        mc = 3 * math.sqrt(0.25 / trials)
        assert emp_lo <= lo_bound + mc
        assert emp_hi <= hi_bound + mc
        details.append(f"delta={delta}: tails ({emp_lo:.4f}, {emp_hi:.4f}) "
                       f"<= bounds ({lo_bound:.4f}, {hi_bound:.4f}) + {mc:.4f}")
    report(6, "; ".join(details))


def test_criterion_07_k1_chain():
    spec = ChainSpec(K=1, c=np.array([2.0]), c_pair=np.zeros((1, 1)), c_out=1.0)
    sim = simulate_limit(spec, 10, 10**5, replicas=10**4, seed=707)
    cap = 30
    probs = {(s,): math.exp(-2.0) * 2.0**s / math.factorial(s) for s in range(cap + 1)}
    z = sum(probs.values())
    oracle = EmpiricalDistribution.from_probabilities(
        {key: v / z for key, v in probs.items()})
    tv_pois = sim.distribution.truncate((cap,)).tv(oracle)
    assert tv_pois < 0.02
    occ = embedded_occupation(spec, 10**6, seed=708, burn_in=1000)
    st = stationary_truncated(spec, (40,))
    tv_occ = occ.truncate((40,)).tv(st)
    assert tv_occ < 0.02
    report(7, f"TV(S(1e5), truncated Poisson(2)) = {tv_pois:.4f} < 0.02; "
              f"embedded occupation vs stationary solve TV = {tv_occ:.4f} < 0.02")


def test_criterion_08_unicyclic_distribution_stability():
    box = (64,)
    small = graph_count_distribution(2, 5, 3, 0, n=50_000, replicas=2000, seed=301)
    big = graph_count_distribution(2, 5, 3, 0, n=200_000, replicas=2000, seed=302,
                                   checkpoints=[100_000])
    d1, _ = small[50_000]
    d2, _ = big[200_000]

    def as_counts(dist):
        # k=0 states carry a single non-complete code; project to the count
        out = {}
        for key, c in dist.counts.items():
            total = sum(cnt for _, cnt in key)
            out[(total,)] = out.get((total,), 0) + c
        return EmpiricalDistribution(counts=out, total=dist.total)

    tv = as_counts(d1).truncate(box).tv(as_counts(d2).truncate(box))
    assert tv < 0.05
    _, completes = big[100_000]
    arr = np.array(completes)
    frac = float(np.mean(arr > 10))
    assert frac >= 0.95
    report(8, f"TV of truncated count distributions at n=5e4 vs 2e5: "
              f"{tv:.4f} < 0.05; N_U0 > 10 at n=1e5 in {frac*100:.1f}% of runs")


def _ef_corpus():
    rnd = random.Random(909)
    graphs = [
        SimpleGraph(3, [(1, 2), (2, 3)]),
        SimpleGraph(4, [(1, 2), (2, 3), (3, 4)]),
        SimpleGraph(3, [(1, 2), (2, 3), (1, 3)]),
        SimpleGraph(5, [(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)]),
        SimpleGraph(4, [(1, 2), (1, 3), (1, 4)]),
        SimpleGraph(1, []),
        SimpleGraph(8, [(i, i + 1) for i in range(1, 8)]),
    ]
    while len(graphs) < 50:
        n = rnd.randint(2, 8)
        edges = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
                 if rnd.random() < 0.4]
        graphs.append(SimpleGraph(n, edges))
    return graphs


def test_criterion_09_ef_solver_oracle():
    t0 = time.perf_counter()
    graphs = _ef_corpus()
    assert len(graphs) == 50
    for g in graphs:
        for rounds in (1, 2, 3):
            assert ef_solve(g, g, rounds) == DUPLICATOR
    # monotonicity: on corpus pairs, a Spoiler win persists for more rounds
    pairs_checked = 0
    for i in range(0, 48, 2):
        g, h = graphs[i], graphs[i + 1]
        winners = [ef_solve(g, h, r) for r in (1, 2, 3)]
        for early, late in zip(winners, winners[1:]):
            if early == SPOILER:
                assert late == SPOILER
        pairs_checked += 1
    p3 = SimpleGraph(3, [(1, 2), (2, 3)])
    p4 = SimpleGraph(4, [(1, 2), (2, 3), (3, 4)])
    assert ef_solve(p3, p4, 1) == DUPLICATOR
    assert ef_solve(p3, p4, 2) == SPOILER
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    report(9, f"identity Duplicator on 50 graphs x R<=3; monotonicity on "
              f"{pairs_checked} pairs; P3/P4 split reproduced; {elapsed:.1f}s")


def test_criterion_10_duplicator_strategy():
    corpus = pair_corpus()
    assert len(corpus) >= 20
    plays_total = 0
    for g1, g2, m1, m2 in corpus:
        assert ef_solve(g1, g2, 2, size_cap=48) == DUPLICATOR
        base = DuplicatorStrategy(g1, g2, EF_CONFIG)  # verifies Q1 and Q2
        for side1 in (0, 1):
            for v1 in range(1, (g1, g2)[side1].n + 1):
                for side2 in (0, 1):
                    for v2 in range(1, (g1, g2)[side2].n + 1):
                        st = base.fresh()
                        st.reply(side1, v1)
                        assert partial_map_is_isomorphism(g1, g2, st.state)
                        st.reply(side2, v2)
                        assert partial_map_is_isomorphism(g1, g2, st.state)
                        plays_total += 1
    report(10, f"{len(corpus)} Q1-and-Q2 pairs: Duplicator survived "
               f"{plays_total} exhaustive 2-round plays; all verdicts match "
               f"ef_solve (Duplicator)")


def test_criterion_11_determinism(tmp_path):
    digests = []
    for tag in ("a", "b"):
        out = tmp_path / f"deg_{tag}"
        assert cli_main(["degrees", "--m", "2", "--d", "5", "--n", "500,1000",
                         "--seeds", "3", "--out", str(out)]) == 0
        cyc = tmp_path / f"cyc_{tag}"
        assert cli_main(["cycles", "--m", "2", "--d", "5", "--n", "2000",
                         "--seeds", "2", "--ell", "3", "--k", "1",
                         "--out", str(cyc)]) == 0
        mk = tmp_path / f"mk_{tag}"
        assert cli_main(["markov", "--m", "2", "--d", "5", "--ell", "3",
                         "--k", "1", "--n", "5000", "--replicas", "400",
                         "--out", str(mk)]) == 0
        digests.append([
            sha256_file(out / "degrees.csv"),
            sha256_file(out / "summary.json"),
            sha256_file(cyc / "cycle_counts.csv"),
            sha256_file(cyc / "census.jsonl"),
            sha256_file(mk / "distribution.jsonl"),
        ])
    assert digests[0] == digests[1]
    report(11, f"two identical runs of degrees/cycles/markov produced "
               f"byte-identical outputs ({len(digests[0])} files compared)")
