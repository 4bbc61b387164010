"""Degree dynamics: censuses, the limiting degree fractions, and the
stability analysis of the drift field.

The degree fractions X_k(n) = N_k(n)/n, k in [m, d], converge to the unique
root rho of the drift system

    f_m = 1 - (m/(1-x_d) + 1) x_m
    f_k = m/(1-x_d) x_{k-1} - (m/(1-x_d) + 1) x_k,   k = m+1..d-1
    f_d = m/(1-x_d) x_{d-1} - x_d

with rho_d the unique root of (m/(m+1-x))^(d-m) = x in (0, 2m/d) and the
remaining coordinates in closed form. The Jacobian of the drift at rho has
top eigenvalue real part exactly -1; its characteristic polynomial factors
as +-(1+lambda) Q(1+lambda) where Q has non-negative coefficients at rho.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .graph import UAGraph, new_seed_graph


@dataclass
class DegreeCensus:
    n: int
    counts: list[int]        # N_k for k = 0..d
    fractions: list[float]   # X_k = N_k / n

    def error_vs(self, rho: np.ndarray, m: int) -> float:
        """max_k |X_k - rho_k| over the analysis range k in [m, d]."""
        return max(abs(self.fractions[m + i] - rho[i]) for i in range(len(rho)))


@dataclass
class FixedPoint:
    m: int
    d: int
    rho: np.ndarray          # (rho_m, ..., rho_d)
    residual: float          # max |f_k(rho)|

    def rho_of_degree(self, k: int) -> float:
        return float(self.rho[k - self.m])


@dataclass
class StabilityReport:
    fixed_point: FixedPoint
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    top_real_part: float
    p_at_minus_one: float    # det(J + I)
    q_coefficients: np.ndarray  # Q(t) coefficients, ascending powers of t


def census_degrees(graph: UAGraph) -> DegreeCensus:
    """Exact counts N_k, k = 0..d, by one pass over the degree table."""
    counts = [0] * (graph.d + 1)
    for v in range(1, graph.n + 1):
        counts[graph.degrees[v]] += 1
    n = graph.n
    return DegreeCensus(n=n, counts=counts, fractions=[c / n for c in counts])


def census_from_degree_list(degrees: Sequence[int], d: int) -> DegreeCensus:
    """Census from a bare degree sequence (1-based tables pass degrees[1:])."""
    counts = [0] * (d + 1)
    for x in degrees:
        counts[x] += 1
    n = len(degrees)
    return DegreeCensus(n=n, counts=counts, fractions=[c / n for c in counts])


def solve_rho(m: int, d: int, tol: float = 1e-12) -> FixedPoint:
    """Bisection for rho_d on (0, 2m/d), then the closed form for rho_m..rho_{d-1}.

    The bracket is guaranteed for d > 2m; 200 iterations drive the interval
    below machine precision regardless of tol.
    """
    if d <= 2 * m:
        raise ValueError(f"need d > 2m, got m={m}, d={d}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    def g(x: float) -> float:
        return (m / (m + 1 - x)) ** (d - m) - x

    lo, hi = 0.0, 2 * m / d
    if not (g(lo) > 0 > g(hi)):
        raise RuntimeError(f"no sign change on (0, 2m/d) for m={m}, d={d}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-17:
            break
    rho_d = 0.5 * (lo + hi)

    rho = np.empty(d - m + 1)
    rho[-1] = rho_d
    for k in range(m, d):
        rho[k - m] = (1 - rho_d) * m ** (k - m) / (m + 1 - rho_d) ** (k - m + 1)
    residual = float(np.max(np.abs(drift_field(rho, m, d))))
    if residual >= tol:
        raise RuntimeError(f"fixed point residual {residual} above tol {tol}")
    return FixedPoint(m=m, d=d, rho=rho, residual=residual)


def drift_field(x, m: int, d: int) -> np.ndarray:
    """The drift vector (f_m, ..., f_d) at x = (x_m, ..., x_d)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (d - m + 1,):
        raise ValueError(f"expected {d - m + 1} coordinates, got {x.shape}")
    xd = x[-1]
    if xd >= 1.0:
        raise ValueError(f"x_d = {xd} is outside the domain (needs x_d < 1)")
    c = m / (1 - xd)
    f = np.empty_like(x)
    f[0] = 1 - (c + 1) * x[0]
    for k in range(m + 1, d):
        i = k - m
        f[i] = c * x[i - 1] - (c + 1) * x[i]
    f[-1] = c * x[-2] - xd
    return f


def drift_jacobian(x, m: int, d: int) -> np.ndarray:
    """Analytic Jacobian of the drift field (the non-zero partials only)."""
    x = np.asarray(x, dtype=float)
    xd = x[-1]
    c = m / (1 - xd)
    c2 = m / (1 - xd) ** 2
    r = d - m + 1
    jac = np.zeros((r, r))
    jac[0, 0] = -c - 1
    jac[0, -1] += -c2 * x[0]
    for k in range(m + 1, d):
        i = k - m
        jac[i, i - 1] = c
        jac[i, i] = -c - 1
        jac[i, -1] += c2 * (x[i - 1] - x[i])
    jac[-1, -2] += c
    jac[-1, -1] += -1 + c2 * x[-2]
    return jac


def q_coefficients(x, m: int, d: int) -> np.ndarray:
    """Coefficients of Q(t) (ascending in t), where the characteristic
    polynomial of the drift Jacobian is +-(1+lambda) Q(1+lambda)."""
    x = np.asarray(x, dtype=float)
    xd = x[-1]
    c = m / (1 - xd)
    q = np.zeros(d - m + 1)
    q[d - m] = 1.0
    for i in range(d - m):
        s = sum(math.comb(k - m, i) * x[k - m] / (1 - xd) for k in range(m + i, d))
        q[i] = c ** (d - m - i) * (math.comb(d - m, i) - s)
    return q


def rho_fraction(m: int, d: int, iters: int = 160) -> list[Fraction]:
    """Fixed point in exact rational arithmetic (bisection to 2^-iters).

    Used where float cancellation amplified by (m/(1-rho_d))^(d-m) would mask
    identities that hold exactly at the fixed point (P(-1) = 0, q_0 = 0).
    """
    # sign of (m/(m+1-x))^(d-m) - x equals sign of m^(d-m) - x (m+1-x)^(d-m)
    def g_sign(x: Fraction) -> int:
        val = Fraction(m) ** (d - m) - x * (m + 1 - x) ** (d - m)
        return (val > 0) - (val < 0)

    lo, hi = Fraction(0), Fraction(2 * m, d)
    for _ in range(iters):
        mid = (lo + hi) / 2
        if g_sign(mid) > 0:
            lo = mid
        else:
            hi = mid
    xd = (lo + hi) / 2
    rho = []
    for k in range(m, d):
        rho.append((1 - xd) * Fraction(m) ** (k - m) / (m + 1 - xd) ** (k - m + 1))
    rho.append(xd)
    return rho


def _fraction_det(mat: list[list[Fraction]]) -> Fraction:
    """Exact determinant by fraction-free Gaussian elimination (tiny matrices)."""
    a = [row[:] for row in mat]
    r = len(a)
    det = Fraction(1)
    for col in range(r):
        piv = next((i for i in range(col, r) if a[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for i in range(col + 1, r):
            factor = a[i][col] * inv
            if factor:
                for j in range(col, r):
                    a[i][j] -= factor * a[col][j]
    return det


def _jacobian_fraction(rho: list[Fraction], m: int, d: int) -> list[list[Fraction]]:
    xd = rho[-1]
    c = Fraction(m) / (1 - xd)
    c2 = Fraction(m) / (1 - xd) ** 2
    r = d - m + 1
    jac = [[Fraction(0)] * r for _ in range(r)]
    jac[0][0] = -c - 1
    jac[0][r - 1] += -c2 * rho[0]
    for k in range(m + 1, d):
        i = k - m
        jac[i][i - 1] = c
        jac[i][i] = -c - 1
        jac[i][r - 1] += c2 * (rho[i - 1] - rho[i])
    jac[r - 1][r - 2] += c
    jac[r - 1][r - 1] += -1 + c2 * rho[-2]
    return jac


def _q_coefficients_fraction(rho: list[Fraction], m: int, d: int) -> list[Fraction]:
    xd = rho[-1]
    c = Fraction(m) / (1 - xd)
    q = [Fraction(0)] * (d - m + 1)
    q[d - m] = Fraction(1)
    for i in range(d - m):
        s = sum((math.comb(k - m, i) * rho[k - m] for k in range(m + i, d)),
                start=Fraction(0)) / (1 - xd)
        q[i] = c ** (d - m - i) * (math.comb(d - m, i) - s)
    return q


def stability_report(fixed_point: FixedPoint, tol_eig: float = 1e-6,
                     tol_p: float = 1e-9) -> StabilityReport:
    """Assemble the Jacobian at the fixed point, check that its top eigenvalue
    real part is -1, that -1 is a root of the characteristic polynomial, and
    that Q(t) has non-negative coefficients.

    Eigenvalues are computed in floats; P(-1) = det(J + I) and the Q(t)
    coefficients are evaluated in exact rational arithmetic at a high-precision
    fixed point, because both quantities vanish (or touch zero) at rho and the
    float cancellation is amplified by c^(d-m).
    """
    m, d, rho = fixed_point.m, fixed_point.d, fixed_point.rho
    jac = drift_jacobian(rho, m, d)
    eig = np.linalg.eigvals(jac)
    top = float(np.max(eig.real))
    rho_hp = rho_fraction(m, d)
    jac_hp = _jacobian_fraction(rho_hp, m, d)
    ident = [[Fraction(int(i == j)) for j in range(d - m + 1)] for i in range(d - m + 1)]
    p_m1 = float(_fraction_det([[jac_hp[i][j] + ident[i][j] for j in range(d - m + 1)]
                                for i in range(d - m + 1)]))
    q_hp = _q_coefficients_fraction(rho_hp, m, d)
    q = np.array([float(v) for v in q_hp])
    if abs(top + 1.0) > tol_eig:
        raise AssertionError(f"top eigenvalue real part {top} is not -1 +- {tol_eig}")
    if abs(p_m1) > tol_p:
        raise AssertionError(f"P(-1) = {p_m1} is not 0 within {tol_p}")
    if min(q_hp) < Fraction(-1, 10**12):
        raise AssertionError(f"Q(t) has a negative coefficient: {float(min(q_hp))}")
    return StabilityReport(fixed_point=fixed_point, jacobian=jac, eigenvalues=eig,
                           top_real_part=top, p_at_minus_one=p_m1, q_coefficients=q)


# -- tail bounds for sums of Bernoulli(p/i) -----------------------------------


class ChernoffBounds(NamedTuple):
    lower_tail_bound: float
    upper_tail_bound: float


def chernoff_bounds(p: float, k: int, n: int, delta: float) -> ChernoffBounds:
    """Tail bounds for S_n = sum_{i=k}^n X_i with independent X_i ~ Bernoulli(p/i):

        Pr(S_n <= (1-delta) p (ln(n+1) - ln k))   <= ((n+1)/k)^(-delta^2 p / 2)
        Pr(S_n >= (1+delta) p (ln n - ln(k-1)))   <= (n/(k-1))^(-delta^2 p / (2+delta))
    """
    _check_chernoff_domain(p, k, n, delta)
    lower = ((n + 1) / k) ** (-delta * delta * p / 2.0)
    upper = (n / (k - 1)) ** (-delta * delta * p / (2.0 + delta))
    return ChernoffBounds(lower, upper)


def chernoff_thresholds(p: float, k: int, n: int, delta: float) -> tuple[float, float]:
    """The deviation thresholds the bounds refer to (lower-tail, upper-tail)."""
    _check_chernoff_domain(p, k, n, delta)
    lo = (1 - delta) * p * (math.log(n + 1) - math.log(k))
    hi = (1 + delta) * p * (math.log(n) - math.log(k - 1))
    return lo, hi


def _check_chernoff_domain(p, k, n, delta) -> None:
    if p <= 0:
        raise ValueError("p must be positive")
    if not 1 < k < n:
        raise ValueError("need 1 < k < n")
    if delta <= 0:
        raise ValueError("delta must be positive")


# -- convergence experiment ----------------------------------------------------


@dataclass
class ConvergenceRow:
    n: int
    replica: int
    k: int
    count: int
    fraction: float
    rho_k: float
    abs_err: float


@dataclass
class ConvergenceReport:
    m: int
    d: int
    n_grid: list[int]
    replicas: int
    seed: int
    fixed_point: FixedPoint
    rows: list[ConvergenceRow]
    max_errors: dict[int, list[float]]  # n -> per-replica max_k |X_k - rho_k|
    slope: float

    def to_csv_rows(self):
        yield ("n", "replica", "k", "N_k", "X_k", "rho_k", "abs_err")
        for r in self.rows:
            yield (r.n, r.replica, r.k, r.count, f"{r.fraction:.17g}",
                   f"{r.rho_k:.17g}", f"{r.abs_err:.17g}")


def replica_seeds(seed: int, count: int) -> list[int]:
    """Per-replica RNG seeds derived from one experiment seed (PCG-independent,
    stable across platforms)."""
    ss = np.random.SeedSequence(seed)
    return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


def _replica_censuses(m: int, d: int, n_grid: tuple[int, ...],
                      rep_seed: int) -> list[DegreeCensus]:
    g = new_seed_graph(m, d)
    rng = random.Random(rep_seed)
    out = []
    for n_target in n_grid:
        g.grow(n_target - g.n, rng=rng)
        out.append(census_from_degree_list(g.degrees[1:], d))
    return out


def convergence_experiment(m: int, d: int, n_grid: Sequence[int], replicas: int,
                           seed: int = 0, jobs: int = 1) -> ConvergenceReport:
    """Grow `replicas` independent graphs through the checkpoint grid and record
    the degree-fraction error against the fixed point at each checkpoint.

    Fits the least-squares slope of log10(max-error) against log10(n) over all
    (replica, checkpoint) points. Degrees below m (transient seed vertices) are
    reported in the census but excluded from the rho comparison. Replicas are
    independent end to end, so jobs > 1 fans them out to a process pool with
    identical results.
    """
    n_grid = sorted(n_grid)
    if not n_grid or n_grid[0] < m:
        raise ValueError("n_grid must be ascending with min >= m")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    fp = solve_rho(m, d)
    seeds = replica_seeds(seed, replicas)
    grid = tuple(n_grid)
    if jobs and jobs > 1:
        import multiprocessing

        with multiprocessing.Pool(jobs) as pool:
            per_replica = pool.starmap(
                _replica_censuses, [(m, d, grid, s) for s in seeds])
    else:
        per_replica = [_replica_censuses(m, d, grid, s) for s in seeds]
    rows: list[ConvergenceRow] = []
    max_errors: dict[int, list[float]] = {n: [] for n in n_grid}
    for rep, censuses in enumerate(per_replica):
        for n_target, census in zip(n_grid, censuses):
            max_errors[n_target].append(census.error_vs(fp.rho, m))
            for k in range(d + 1):
                rho_k = fp.rho_of_degree(k) if k >= m else 0.0
                abs_err = abs(census.fractions[k] - rho_k) if k >= m else 0.0
                rows.append(ConvergenceRow(n=n_target, replica=rep, k=k,
                                           count=census.counts[k],
                                           fraction=census.fractions[k],
                                           rho_k=rho_k, abs_err=abs_err))
    slope = fit_loglog_slope(max_errors)
    return ConvergenceReport(m=m, d=d, n_grid=list(n_grid), replicas=replicas,
                             seed=seed, fixed_point=fp, rows=rows,
                             max_errors=max_errors, slope=slope)


def fit_loglog_slope(max_errors: dict[int, list[float]]) -> float:
    """OLS slope of log10(error) on log10(n), over all replica checkpoints."""
    xs, ys = [], []
    for n, errs in max_errors.items():
        for e in errs:
            if e > 0:
                xs.append(math.log10(n))
                ys.append(math.log10(e))
    if len(set(xs)) < 2:
        return float("nan")
    x = np.array(xs)
    y = np.array(ys)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
