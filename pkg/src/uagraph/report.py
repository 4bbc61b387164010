"""Report rendering: tidy CSV transforms plus matplotlib figures written to
files alongside the delimited output of a finished run directory."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .manifest import read_manifest, write_csv  # noqa: E402


def render_report(run_dir) -> list[Path]:
    """Dispatch on the run's command; returns the files written."""
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    command = manifest["command"]
    if command == "degrees":
        return _report_degrees(run_dir, manifest)
    if command == "cycles":
        return _report_cycles(run_dir, manifest)
    if command == "markov":
        return _report_markov(run_dir, manifest)
    if command == "trees":
        return _report_trees(run_dir, manifest)
    raise ValueError(f"no report renderer for command {command!r}")


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _report_degrees(run_dir: Path, manifest) -> list[Path]:
    header, rows = _read_csv(run_dir / "degrees.csv")
    idx = {name: i for i, name in enumerate(header)}
    per_point = defaultdict(float)
    for row in rows:
        n = int(row[idx["n"]])
        rep = int(row[idx["replica"]])
        err = float(row[idx["abs_err"]])
        per_point[(n, rep)] = max(per_point[(n, rep)], err)
    tidy = run_dir / "report_errors.csv"
    write_csv(tidy, [("n", "replica", "max_abs_err")] +
              [(n, rep, err) for (n, rep), err in sorted(per_point.items())])

    with open(run_dir / "summary.json", encoding="utf-8") as fh:
        summary = json.load(fh)
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = sorted({n for n, _ in per_point})
    for n in ns:
        errs = [e for (nn, _), e in per_point.items() if nn == n]
        ax.scatter([n] * len(errs), errs, s=12, alpha=0.5, color="tab:blue")
    means = [sum(e for (nn, _), e in per_point.items() if nn == n) /
             max(1, sum(1 for (nn, _) in per_point if nn == n)) for n in ns]
    ax.plot(ns, means, "o-", color="tab:red",
            label=f"mean (fit slope {summary['slope']:.3f})")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("max_k |X_k - rho_k|")
    ax.legend()
    fig.tight_layout()
    png = run_dir / "report_convergence.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return [tidy, png]


def _report_cycles(run_dir: Path, manifest) -> list[Path]:
    header, rows = _read_csv(run_dir / "cycle_counts.csv")
    idx = {name: i for i, name in enumerate(header)}
    by_n = defaultdict(list)
    for row in rows:
        by_n[int(row[idx["n"]])].append(int(row[idx["count"]]))
    tidy = run_dir / "report_cycle_means.csv"
    write_csv(tidy, [("n", "mean_count", "replicas")] +
              [(n, sum(v) / len(v), len(v)) for n, v in sorted(by_n.items())])
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = sorted(by_n)
    ax.plot(ns, [sum(by_n[n]) / len(by_n[n]) for n in ns], "o-")
    ax.set_xscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("mean cycle count")
    fig.tight_layout()
    png = run_dir / "report_cycle_growth.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return [tidy, png]


def _report_markov(run_dir: Path, manifest) -> list[Path]:
    totals = defaultdict(float)
    with open(run_dir / "distribution.jsonl", encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            totals[sum(x for _, x in rec["state"]) if rec["state"] and
                   isinstance(rec["state"][0], list)
                   else sum(rec["state"])] += rec["probability"]
    tidy = run_dir / "report_total_counts.csv"
    write_csv(tidy, [("total_count", "probability")] +
              [(k, v) for k, v in sorted(totals.items())])
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = sorted(totals)
    ax.bar(ks, [totals[k] for k in ks])
    ax.set_xlabel("total non-complete count")
    ax.set_ylabel("probability")
    fig.tight_layout()
    png = run_dir / "report_distribution.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    return [tidy, png]


def _report_trees(run_dir: Path, manifest) -> list[Path]:
    recs = []
    with open(run_dir / "trees.jsonl", encoding="utf-8") as fh:
        for line in fh:
            recs.append(json.loads(line))
    recs = [r for r in recs if r.get("rho") is not None]
    recs.sort(key=lambda r: -r["rho"])
    top = recs[:20]
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(len(top))
    ax.bar(xs, [r["rho"] for r in top], width=0.4, label="limit density")
    if any("fraction" in r and r["fraction"] is not None for r in top):
        ax.bar([x + 0.4 for x in xs],
               [r.get("fraction") or 0.0 for r in top], width=0.4,
               label="empirical fraction")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([str(i + 1) for i in xs])
    ax.set_xlabel("type rank")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    png = run_dir / "report_densities.png"
    fig.savefig(png, dpi=120)
    plt.close(fig)
    tidy = run_dir / "report_densities.csv"
    write_csv(tidy, [("rank", "code", "rho", "fraction")] +
              [(i + 1, r["code"], r["rho"], r.get("fraction", ""))
               for i, r in enumerate(top)])
    return [tidy, png]
