"""Seeded verification suites for the subspace solvers.

Each suite runs the solver against an independent reference (sign
enumeration, deflated power iteration, or a known planted direction) on
seeded random instances and reports aggregate statistics. The CLI's
oracle-check command and the acceptance tests both consume these.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import subspace as ss
from .rng import derive_rng

__all__ = [
    "SuiteResult",
    "l1pca_suite",
    "l1_2dpca_suite",
    "l2_baseline_suite",
    "deflation_suite",
    "robustness_suite",
]


@dataclass
class SuiteResult:
    name: str
    trials: int
    elapsed: float
    stats: dict = field(default_factory=dict)


def _fixed_point_error(w, X):
    """|| w - normalize(sum_i sign(w^T x_i) x_i) ||_inf, ties +1."""
    p = np.where(w @ X >= 0.0, 1.0, -1.0)
    s = X @ p
    norm = np.linalg.norm(s)
    if norm == 0.0:
        return np.inf
    return float(np.max(np.abs(w - s / norm)))


def _polarity_suite(name, make_columns, trials, seed):
    t0 = time.perf_counter()
    attained = 0
    max_monotone_violation = 0.0
    max_fixed_point_error = 0.0
    max_excess = -np.inf
    all_converged = True
    max_iterations = 0
    for trial in range(trials):
        X = make_columns(derive_rng(seed, name, trial))
        pd = ss.l1pca_first_component(X, track_objective=True)
        oracle = ss.l1pca_oracle(X)
        all_converged &= pd.converged
        max_iterations = max(max_iterations, pd.iterations)
        hist = pd.objective_history
        for a, b in zip(hist, hist[1:]):
            max_monotone_violation = max(max_monotone_violation, a - b)
        max_fixed_point_error = max(max_fixed_point_error,
                                    _fixed_point_error(pd.w, X))
        gap = oracle.objective - pd.objective
        max_excess = max(max_excess, -gap)
        if gap <= 1e-9:
            attained += 1
    return SuiteResult(
        name=name,
        trials=trials,
        elapsed=time.perf_counter() - t0,
        stats={
            "all_converged": bool(all_converged),
            "max_iterations": max_iterations,
            "max_monotone_violation": max_monotone_violation,
            "max_fixed_point_error": max_fixed_point_error,
            "attainment_rate": attained / trials,
            "max_excess_over_oracle": max_excess,
        },
    )


def l1pca_suite(trials=500, seed=101):
    """Algorithm vs sign-enumeration oracle on D <= 3, N <= 10 columns."""
    def make(rng):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 11))
        return rng.standard_normal((d, n))

    return _polarity_suite("l1pca-oracle", make, trials, seed)


def l1_2dpca_suite(trials=500, seed=202):
    """Row-data analogue: <= 5 samples x 2 rows x width <= 3.

    The row solver sums over all rows, so the instance is the transposed
    column matrix of all rows; the oracle enumerates one sign per row.
    """
    def make(rng):
        samples = int(rng.integers(1, 6))
        width = int(rng.integers(1, 4))
        rows = rng.standard_normal((samples * 2, width))
        return rows.T  # columns = rows of the row data set

    return _polarity_suite("l1-2dpca-oracle", make, trials, seed)


def l2_baseline_suite(trials=100, seed=303):
    """eigh-based baselines vs deflated power iteration, up to 25x25."""
    t0 = time.perf_counter()
    worst = 0.0
    for trial in range(trials):
        rng = derive_rng(seed, "l2-baseline", trial)
        n = int(rng.integers(2, 26))
        L = min(4, n)
        X = rng.standard_normal((n, 8 * n))
        ref = ss.power_iteration_components(X @ X.T, L)
        for a, b in zip(ss.l2pca_components(X, L), ref):
            worst = max(worst, min(np.linalg.norm(a.w - b.w),
                                   np.linalg.norm(a.w + b.w)))
        rows = rng.standard_normal((8 * n, n))
        ref = ss.power_iteration_components(rows.T @ rows, L)
        for a, b in zip(ss.l2_2dpca_components(rows, L), ref):
            worst = max(worst, min(np.linalg.norm(a.w - b.w),
                                   np.linalg.norm(a.w + b.w)))
    return SuiteResult(
        name="l2-baseline",
        trials=trials,
        elapsed=time.perf_counter() - t0,
        stats={"max_direction_error": worst},
    )


def deflation_suite(trials=100, seed=404):
    """Pairwise orthogonality of min(4, dim) components from every solver."""
    t0 = time.perf_counter()
    worst = 0.0

    def check(dirs):
        nonlocal worst
        W = np.stack([d.w for d in dirs])
        gram = np.abs(W @ W.T - np.eye(len(dirs)))
        worst = max(worst, float(gram.max()))

    for trial in range(trials):
        rng = derive_rng(seed, "deflation", trial)
        d = int(rng.integers(2, 9))
        L = min(4, d)
        X = rng.standard_normal((d, 6 * d))
        rows = rng.standard_normal((6 * d, d))
        check(ss.l1pca_components(X, L))
        check(ss.l2pca_components(X, L))
        check(ss.l1_2dpca_components(rows, L))
        check(ss.l2_2dpca_components(rows, L))
    return SuiteResult(
        name="deflation-orthogonality",
        trials=trials,
        elapsed=time.perf_counter() - t0,
        stats={"max_abs_inner_product": worst},
    )


def robustness_suite(trials=50, seed=505, n_points=60, outlier_fraction=0.1,
                     outlier_scale=10.0):
    """Angular error of the first direction under orthogonal outliers.

    Planted direction e1; 10% of the columns are replaced by large
    outliers along e2. Reports the median angular error of L1-PCA and
    L2-PCA over the seeded trials.
    """
    t0 = time.perf_counter()
    errs_l1, errs_l2 = [], []
    for trial in range(trials):
        rng = derive_rng(seed, "robustness", trial)
        t = rng.standard_normal(n_points)
        X = np.stack([t, 0.05 * rng.standard_normal(n_points)])
        n_out = max(1, int(round(outlier_fraction * n_points)))
        out_idx = rng.choice(n_points, size=n_out, replace=False)
        X[0, out_idx] = 0.0
        X[1, out_idx] = outlier_scale * rng.choice([-1.0, 1.0], size=n_out)

        def angle(w):
            return float(np.arccos(min(1.0, abs(w[0]))))

        errs_l1.append(angle(ss.l1pca_first_component(X).w))
        errs_l2.append(angle(ss.l2pca_components(X, 1)[0].w))
    return SuiteResult(
        name="outlier-robustness",
        trials=trials,
        elapsed=time.perf_counter() - t0,
        stats={
            "median_angle_l1": float(np.median(errs_l1)),
            "median_angle_l2": float(np.median(errs_l2)),
        },
    )
