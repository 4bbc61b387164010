"""Command-line entry point: reproducible, persisted experiment runs.

Every command writes its data outputs plus manifest.json into --out; the
manifest freezes the effective configuration (flags > config file > defaults)
and the content digests of the outputs. Exit codes: 0 success, 1 validation
error, 2 assertion or property failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chain import (ChainSpec, chain_distribution_keyed, compare_graph_vs_chain,
                    derive_constants, simulate_limit)
from .cycles import census_unicyclic, find_cycles, triangles_from_arrivals
from .degrees import convergence_experiment, solve_rho, stability_report
from .efgame import (DuplicatorStrategy, GameConfig, check_Q1, check_Q2,
                     ef_solve, partial_map_is_isomorphism)
from .graph import load_graph, new_seed_graph, write_snapshot
from .manifest import RunManifest, write_csv, write_json, write_jsonl
from .report import render_report
from .trees import census_trees, solve_tree_fixed_point


def _parse_seeds(raw: str) -> list[int]:
    if "," in raw:
        return [int(tok) for tok in raw.split(",") if tok.strip()]
    return list(range(int(raw)))


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _effective_config(args, keys) -> dict:
    file_cfg = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
    cfg = {}
    for key in keys:
        val = getattr(args, key, None)
        if val is None:
            val = file_cfg.get(key)
        cfg[key] = val
    return cfg


def cmd_generate(args) -> int:
    cfg = _effective_config(args, ["m", "d", "n", "seeds"])
    if cfg["d"] <= 2 * cfg["m"]:
        raise ValueError(f"d={cfg['d']} with m={cfg['m']} is excluded: need d > 2m")
    out = _outdir(args)
    manifest = RunManifest("generate", cfg).start()
    for seed in _parse_seeds(cfg["seeds"]):
        g = new_seed_graph(cfg["m"], cfg["d"]).grow(cfg["n"] - cfg["m"], rng_seed=seed)
        path = out / f"graph_seed{seed}.ua"
        write_snapshot(g, path)
        manifest.add_output(path)
    manifest.finish(out)
    print(f"wrote {len(manifest.outputs)} snapshots to {out}")
    return 0


def cmd_degrees(args) -> int:
    cfg = _effective_config(args, ["m", "d", "n", "seeds", "jobs"])
    n_grid = sorted({int(float(tok)) for tok in str(cfg["n"]).split(",")})
    seeds = _parse_seeds(cfg["seeds"])
    out = _outdir(args)
    manifest = RunManifest("degrees", {**cfg, "n_grid": n_grid}).start()
    rep = convergence_experiment(cfg["m"], cfg["d"], n_grid, len(seeds),
                                 seed=seeds[0] if seeds else 0,
                                 jobs=cfg["jobs"] or 1)
    csv_path = out / "degrees.csv"
    write_csv(csv_path, rep.to_csv_rows())
    stab = stability_report(rep.fixed_point)
    summary = {
        "m": cfg["m"], "d": cfg["d"], "slope": rep.slope,
        "rho": rep.fixed_point.rho.tolist(),
        "residual": rep.fixed_point.residual,
        "eigenvalues": [[v.real, v.imag] for v in stab.eigenvalues],
        "top_real_part": stab.top_real_part,
        "max_errors": {str(k): v for k, v in rep.max_errors.items()},
    }
    sj = out / "summary.json"
    write_json(sj, summary)
    manifest.add_output(csv_path)
    manifest.add_output(sj)
    manifest.finish(out)
    print(f"slope {rep.slope:.4f}; outputs in {out}")
    return 0


def cmd_fixed_point(args) -> int:
    cfg = _effective_config(args, ["m", "d", "tol"])
    fp = solve_rho(cfg["m"], cfg["d"], tol=cfg["tol"] or 1e-12)
    stab = stability_report(fp)
    print(f"fixed point for m={cfg['m']}, d={cfg['d']} "
          f"(residual {fp.residual:.3g}):")
    for k in range(cfg["m"], cfg["d"] + 1):
        print(f"  rho_{k} = {fp.rho_of_degree(k):.12f}")
    print(f"  sum = {float(np.sum(fp.rho)):.12f}")
    print(f"  top eigenvalue real part = {stab.top_real_part:.9f}")
    if args.out:
        out = _outdir(args)
        manifest = RunManifest("fixed-point", cfg).start()
        path = out / "fixed_point.json"
        write_json(path, {
            "m": cfg["m"], "d": cfg["d"],
            "rho": fp.rho.tolist(), "residual": fp.residual,
            "eigenvalues": [[v.real, v.imag] for v in stab.eigenvalues],
            "p_at_minus_one": stab.p_at_minus_one,
            "q_coefficients": stab.q_coefficients.tolist(),
        })
        manifest.add_output(path)
        manifest.finish(out)
    return 0


def cmd_trees(args) -> int:
    cfg = _effective_config(args, ["m", "d", "depth", "n", "seeds", "tol"])
    out = _outdir(args)
    manifest = RunManifest("trees", cfg).start()
    tfp = solve_tree_fixed_point(cfg["m"], cfg["d"], cfg["depth"],
                                 tol=cfg["tol"] or 1e-10)
    fractions: dict[str, float] = {}
    counts: dict[str, int] = {}
    if cfg["n"]:
        seeds = _parse_seeds(cfg["seeds"] or "1")
        total = 0
        for seed in seeds:
            g = new_seed_graph(cfg["m"], cfg["d"]).grow(cfg["n"] - cfg["m"],
                                                        rng_seed=seed)
            cen = census_trees(g, cfg["depth"])
            for code, cnt in cen.counts.items():
                counts[code] = counts.get(code, 0) + cnt
            total += cen.n
        fractions = {code: cnt / total for code, cnt in counts.items()}
    table = tfp.table(cfg["depth"])
    records = []
    for code in sorted(set(table) | set(fractions)):
        records.append({
            "code": code, "depth": cfg["depth"],
            "count": counts.get(code, 0),
            "fraction": fractions.get(code),
            "rho": table.get(code),
        })
    path = out / "trees.jsonl"
    write_jsonl(path, records)
    manifest.add_output(path)
    manifest.finish(out)
    print(f"{len(table)} types at depth {cfg['depth']}; outputs in {out}")
    return 0


def cmd_cycles(args) -> int:
    cfg = _effective_config(args, ["m", "d", "n", "seeds", "ell", "k"])
    ell = cfg["ell"] or 3
    depth = cfg["k"] if cfg["k"] is not None else 0
    out = _outdir(args)
    manifest = RunManifest("cycles", {**cfg, "ell": ell, "k": depth}).start()
    seeds = _parse_seeds(cfg["seeds"])
    checkpoints = []
    x = 1024
    while x < cfg["n"]:
        checkpoints.append(x)
        x *= 2
    checkpoints.append(cfg["n"])
    count_rows = [("n", "replica", "count")]
    census_counts: dict[str, int] = {}
    census_complete: dict[str, bool] = {}
    cycle_rows = [("length", "vertices")]
    for rep, seed in enumerate(seeds):
        g = new_seed_graph(cfg["m"], cfg["d"]).grow(cfg["n"] - cfg["m"],
                                                    rng_seed=seed)
        if ell == 3:
            tris = triangles_from_arrivals(g)
            for cp in checkpoints:
                count_rows.append((cp, rep, sum(1 for t in tris if t[0] <= cp)))
        else:
            count_rows.append((cfg["n"], rep,
                               sum(1 for c in find_cycles(g, ell)
                                   if c.length == ell)))
        cen = census_unicyclic(g, ell, depth)
        for code, cnt in cen.counts.items():
            census_counts[code] = census_counts.get(code, 0) + cnt
            census_complete[code] = cen.types[code].complete
        if rep == 0:
            for rec in find_cycles(g, ell):
                cycle_rows.append((rec.length,
                                   " ".join(str(v) for v in rec.vertices)))
    counts_path = out / "cycle_counts.csv"
    write_csv(counts_path, count_rows)
    list_path = out / "cycles.csv"
    write_csv(list_path, cycle_rows)
    census_path = out / "census.jsonl"
    write_jsonl(census_path, [
        {"ell": ell, "k": depth, "code": code, "count": cnt,
         "complete": census_complete[code]}
        for code, cnt in sorted(census_counts.items())])
    for p in (counts_path, list_path, census_path):
        manifest.add_output(p)
    manifest.finish(out)
    print(f"outputs in {out}")
    return 0


def cmd_markov(args) -> int:
    cfg = _effective_config(args, ["m", "d", "ell", "k", "n", "replicas",
                                   "n_start", "chain_spec", "compare"])
    out = _outdir(args)
    manifest = RunManifest("markov", cfg).start()
    if cfg["chain_spec"]:
        with open(cfg["chain_spec"], encoding="utf-8") as fh:
            spec = ChainSpec.from_json(fh.read())
    else:
        spec = derive_constants(cfg["m"], cfg["d"], cfg["ell"] or 3,
                                cfg["k"] if cfg["k"] is not None else 1)
    spec_path = out / "chain_spec.json"
    spec_path.write_text(spec.to_json(), encoding="utf-8")
    manifest.add_output(spec_path)
    n_start = cfg["n_start"] or 100
    sim = simulate_limit(spec, n_start, cfg["n"], cfg["replicas"] or 2000)
    dist = (chain_distribution_keyed(spec, sim) if spec.codes
            else sim.distribution)
    dist_path = out / "distribution.jsonl"
    write_jsonl(dist_path, [
        {"state": [list(p) for p in state] if spec.codes else list(state),
         "probability": prob}
        for state, prob in sorted(dist.probabilities().items())])
    manifest.add_output(dist_path)
    summary = {"batch_tv": sim.batch_tv, "replicas": sim.replicas,
               "n_start": n_start, "n": cfg["n"]}
    if cfg["compare"]:
        repc = compare_graph_vs_chain(cfg["m"], cfg["d"], cfg["ell"] or 3,
                                      cfg["k"] if cfg["k"] is not None else 1,
                                      cfg["n"], cfg["replicas"] or 2000,
                                      spec=spec)
        summary["compare"] = {
            "tv": repc.tv, "noise_floor_tv": repc.noise_floor_tv,
            "total_marginal_tv": repc.total_marginal_tv,
            "worst_type_marginal_tv": repc.worst_type_marginal_tv,
            "complete_quantiles": repc.complete_quantiles,
        }
    sj = out / "markov_summary.json"
    write_json(sj, summary)
    manifest.add_output(sj)
    manifest.finish(out)
    print(f"batch TV {sim.batch_tv:.4f}; outputs in {out}")
    return 0


def cmd_efgame(args) -> int:
    cfg = _effective_config(args, ["g1", "g2", "rounds", "n0", "N0", "d",
                                   "mode", "spoiler"])
    g1 = load_graph(cfg["g1"])
    mode = cfg["mode"] or "solve"
    out = _outdir(args)
    manifest = RunManifest("efgame", {k: v for k, v in cfg.items()
                                      if k not in ("g1", "g2")}).start()
    result: dict = {"mode": mode}
    if mode == "q1":
        gc = GameConfig(R=cfg["rounds"], n0=cfg["n0"], N0=cfg["N0"],
                        d=cfg["d"] or max(g1.degree(v) for v in range(1, g1.n + 1)))
        rep = check_Q1(g1, gc)
        result.update({"ok": rep.ok, "clause": rep.clause,
                       "witness": repr(rep.witness)})
    else:
        g2 = load_graph(cfg["g2"])
        if mode == "solve":
            winner = ef_solve(g1, g2, cfg["rounds"],
                              size_cap=max(g1.n, g2.n, 16))
            result["winner"] = winner
            print(f"winner: {winner}")
        elif mode == "q2":
            gc = GameConfig(R=cfg["rounds"], n0=cfg["n0"], N0=cfg["N0"],
                            d=cfg["d"])
            rep = check_Q2(g1, g2, gc)
            result.update({"ok": rep.ok, "clause": rep.clause,
                           "witness": repr(rep.witness)})
        elif mode == "match":
            gc = GameConfig(R=cfg["rounds"], n0=cfg["n0"], N0=cfg["N0"],
                            d=cfg["d"])
            strat = DuplicatorStrategy(g1, g2, gc)
            transcript = []
            for tok in (cfg["spoiler"] or "").split(","):
                side, vertex = (int(x) for x in tok.split(":"))
                reply = strat.reply(side, vertex)
                ok = partial_map_is_isomorphism(g1, g2, strat.state)
                transcript.append({"round": strat.state.round_index - 1,
                                   "side": side, "vertex": vertex,
                                   "reply": reply, "invariant_ok": ok})
            path = out / "match.jsonl"
            write_jsonl(path, transcript)
            manifest.add_output(path)
            result["rounds_played"] = len(transcript)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    vp = out / "result.json"
    write_json(vp, result)
    manifest.add_output(vp)
    manifest.finish(out)
    return 0


def cmd_report(args) -> int:
    written = render_report(args.run)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="uagraph",
        description="bounded-degree uniform attachment graph toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *flags):
        if "m" in flags:
            sp.add_argument("--m", type=int)
        if "d" in flags:
            sp.add_argument("--d", type=int)
        if "n" in flags:
            sp.add_argument("--n", type=int)
        if "seeds" in flags:
            sp.add_argument("--seeds", type=str)
        if "out" in flags:
            sp.add_argument("--out", type=str, required=True)
        sp.add_argument("--config", type=str)

    sp = sub.add_parser("generate", help="grow and persist graph snapshots")
    common(sp, "m", "d", "n", "seeds", "out")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("degrees", help="degree convergence experiment")
    common(sp, "m", "d", "seeds", "out")
    sp.add_argument("--n", type=str, help="comma-separated checkpoint grid")
    sp.add_argument("--jobs", type=int)
    sp.set_defaults(func=cmd_degrees)

    sp = sub.add_parser("fixed-point", help="limiting degree fractions")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out", type=str)
    sp.add_argument("--config", type=str)
    sp.set_defaults(func=cmd_fixed_point)

    sp = sub.add_parser("trees", help="tree type densities and censuses")
    common(sp, "m", "d", "n", "seeds", "out")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--tol", type=float)
    sp.set_defaults(func=cmd_trees)

    sp = sub.add_parser("cycles", help="cycle counts and unicyclic censuses")
    common(sp, "m", "d", "n", "seeds", "out")
    sp.add_argument("--ell", type=int)
    sp.add_argument("--k", type=int)
    sp.set_defaults(func=cmd_cycles)

    sp = sub.add_parser("markov", help="unicyclic-count chain simulation")
    common(sp, "m", "d", "out")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--ell", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--replicas", type=int)
    sp.add_argument("--n-start", dest="n_start", type=int)
    sp.add_argument("--chain-spec", dest="chain_spec", type=str)
    sp.add_argument("--compare", action="store_true",
                    help="also run the graph-vs-chain comparison")
    sp.set_defaults(func=cmd_markov)

    sp = sub.add_parser("efgame", help="EF games, Q1/Q2 checks, matches")
    sp.add_argument("--g1", type=str, required=True)
    sp.add_argument("--g2", type=str)
    sp.add_argument("--rounds", type=int, required=True)
    sp.add_argument("--n0", type=int)
    sp.add_argument("--N0", dest="N0", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--mode", choices=["solve", "q1", "q2", "match"])
    sp.add_argument("--spoiler", type=str,
                    help="comma-separated side:vertex spoiler moves")
    sp.add_argument("--out", type=str, required=True)
    sp.add_argument("--config", type=str)
    sp.set_defaults(func=cmd_efgame)

    sp = sub.add_parser("report", help="tidy CSV and figures for a run")
    sp.add_argument("--run", type=str, required=True)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AssertionError, RuntimeError) as exc:
        print(f"property failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
