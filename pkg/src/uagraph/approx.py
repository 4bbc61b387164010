"""Generic stochastic approximation runner and condition checker.

A process follows the recursion

    Z(n+1) - Z(n) = (F(Z(n)) + E_{n+1} + R_{n+1}) / (n+1)

with drift F, martingale-difference noise E and bias R. The runner applies
the recursion exactly and records checkpoints on a geometric grid; the
checker probes the standard convergence conditions (stable Jacobian at the
root with spectral margin L > 1/2, inward drift, centered noise with bounded
second moments) numerically and reports PASS/FAIL per condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


@dataclass
class SAProcess:
    dim: int
    drift: Callable[[np.ndarray], np.ndarray]
    theta: np.ndarray | None = None
    noise_hook: Callable[[np.random.Generator, int, np.ndarray], np.ndarray] | None = None
    bias_hook: Callable[[np.random.Generator, int, np.ndarray], np.ndarray] | None = None
    constraint: Callable[[np.ndarray], bool] | None = None


@dataclass
class SATrace:
    checkpoints: list[tuple[int, np.ndarray]]
    errors: list[tuple[int, float]]          # |Z(n) - theta| when theta is known
    final_n: int
    final_state: np.ndarray
    halted: bool = False
    halted_at: int | None = None

    def error_at_end(self) -> float:
        return self.errors[-1][1] if self.errors else float("nan")


def geometric_grid(n_start: int, n_end: int, ratio: float = 2.0) -> list[int]:
    grid = []
    x = float(max(n_start, 1))
    while x < n_end:
        v = int(round(x))
        if not grid or v > grid[-1]:
            grid.append(v)
        x *= ratio
    if not grid or grid[-1] != n_end:
        grid.append(n_end)
    return grid


def run_sa(process: SAProcess, n_start: int, n_end: int, rng_seed: int,
           initial_state) -> SATrace:
    """Apply the recursion from time n_start to n_end, checkpointing on a
    geometric grid. If the state leaves the constraint set the run halts and
    the trace is flagged."""
    if n_end <= n_start:
        raise ValueError("need n_end > n_start")
    z = np.array(initial_state, dtype=float)
    if z.shape != (process.dim,):
        raise ValueError(f"initial state must have dim {process.dim}")
    if process.constraint is not None and not process.constraint(z):
        raise ValueError("initial state violates the constraint set")
    rng = np.random.default_rng(rng_seed)
    grid = set(geometric_grid(n_start, n_end))
    checkpoints: list[tuple[int, np.ndarray]] = [(n_start, z.copy())]
    errors: list[tuple[int, float]] = []
    theta = process.theta
    if theta is not None:
        errors.append((n_start, float(np.linalg.norm(z - theta))))
    for n in range(n_start, n_end):
        step = process.drift(z).astype(float)
        if process.noise_hook is not None:
            step = step + process.noise_hook(rng, n + 1, z)
        if process.bias_hook is not None:
            step = step + process.bias_hook(rng, n + 1, z)
        z = z + step / (n + 1)
        if process.constraint is not None and not process.constraint(z):
            checkpoints.append((n + 1, z.copy()))
            if theta is not None:
                errors.append((n + 1, float(np.linalg.norm(z - theta))))
            return SATrace(checkpoints=checkpoints, errors=errors, final_n=n + 1,
                           final_state=z, halted=True, halted_at=n + 1)
        if (n + 1) in grid:
            checkpoints.append((n + 1, z.copy()))
            if theta is not None:
                errors.append((n + 1, float(np.linalg.norm(z - theta))))
    return SATrace(checkpoints=checkpoints, errors=errors, final_n=n_end,
                   final_state=z)


@dataclass
class ConditionCheck:
    name: str
    passed: bool
    evidence: dict


@dataclass
class ConditionReport:
    checks: list[ConditionCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {c.name: {"passed": c.passed, "evidence": c.evidence}
                for c in self.checks}


def numeric_jacobian(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                     h: float = 1e-6) -> np.ndarray:
    """Central differences; drift evaluators may be black-box."""
    x = np.asarray(x, dtype=float)
    r = x.size
    out = np.zeros((r, r))
    for j in range(r):
        xp = x.copy()
        xp[j] += h
        xm = x.copy()
        xm[j] -= h
        out[:, j] = (np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2 * h)
    return out


def check_conditions(process: SAProcess, probe_points: Sequence,
                     rng_seed: int = 0, eps: float = 1e-3,
                     noise_samples: int = 4000) -> ConditionReport:
    """Numeric verification of the convergence conditions at the known root.

    A1: all eigenvalue real parts of the Jacobian at theta negative, with the
        top one -L satisfying L > 1/2.
    A2: F(x)^t (x - theta) < 0 at every probe outside an eps-ball of theta
        (monotone in the probe set: adding probes can only turn PASS to FAIL).
    A3: noise has conditional mean 0 (within 4 sigma of the empirical mean
        estimator) and bounded second moments, sampled at the probes.
    """
    if process.theta is None:
        raise ValueError("check_conditions needs a process with known theta")
    theta = np.asarray(process.theta, dtype=float)
    report = ConditionReport()

    jac = numeric_jacobian(process.drift, theta)
    eig = np.linalg.eigvals(jac)
    top = float(np.max(eig.real))
    big_l = -top
    report.checks.append(ConditionCheck(
        name="A1", passed=bool(np.all(eig.real < 0) and big_l > 0.5),
        evidence={"top_real_part": top, "L": big_l,
                  "eigenvalues": [complex(v) for v in eig]}))

    worst = -math.inf
    worst_probe = None
    for p in probe_points:
        x = np.asarray(p, dtype=float)
        if np.linalg.norm(x - theta) <= eps:
            continue
        val = float(np.dot(process.drift(x), x - theta))
        if val > worst:
            worst, worst_probe = val, x.tolist()
    report.checks.append(ConditionCheck(
        name="A2", passed=bool(worst < 0),
        evidence={"max_inner_product": worst, "worst_probe": worst_probe}))

    if process.noise_hook is None:
        report.checks.append(ConditionCheck(
            name="A3", passed=True, evidence={"note": "no noise hook (E = 0)"}))
    else:
        rng = np.random.default_rng(rng_seed)
        mean_ok = True
        sup_second = 0.0
        worst_t = 0.0
        for p in probe_points:
            x = np.asarray(p, dtype=float)
            samples = np.array([process.noise_hook(rng, 10**6, x)
                                for _ in range(noise_samples)], dtype=float)
            mu = samples.mean(axis=0)
            sd = samples.std(axis=0, ddof=1) / math.sqrt(noise_samples)
            t = float(np.max(np.abs(mu) / np.maximum(sd, 1e-300)))
            worst_t = max(worst_t, t)
            if t > 4.0:
                mean_ok = False
            sup_second = max(sup_second, float(np.max(np.mean(samples**2, axis=0))))
        report.checks.append(ConditionCheck(
            name="A3", passed=bool(mean_ok and math.isfinite(sup_second)),
            evidence={"max_t_statistic": worst_t,
                      "sup_second_moment": sup_second}))
    return report


def trace_csv_rows(trace: SATrace):
    dim = trace.final_state.size
    errs = dict(trace.errors)
    yield ("n", *[f"z{i}" for i in range(dim)], "error")
    for n, state in trace.checkpoints:
        err = errs.get(n, float("nan"))
        yield (n, *[f"{v:.17g}" for v in state], f"{err:.17g}")
