"""Filter-learning solvers: L1-PCA, L1-2DPCA, and their L2 baselines.

The L1 solvers maximize the L1-norm variance sum_i |w^T x_i| over unit
vectors w by the polarity fixed-point iteration: starting from w(0) = 0
(all polarities +1, since the tie w^T x = 0 takes +1), repeat

    w(t) = normalize( sum_i p_i(t-1) x_i ),   p_i(t) = sign-ish of w(t)^T x_i

until the iterate stops moving. Further directions come from greedy
deflation: project every data vector onto the orthogonal complement of the
directions found so far. The objective is nondecreasing along the
iteration and the limit is a fixed point, but only a local maximum in
general; `l1pca_oracle` enumerates all 2^N polarity assignments and gives
the global optimum for small N.

The L2 baselines are ordinary eigendecompositions of the scatter matrix;
`power_iteration_components` is an independent deflated power-iteration
solver kept for cross-checking them.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, InvalidParameterError, NumericError

__all__ = [
    "PrincipalDirection",
    "RowDataSet",
    "l1_objective",
    "l1pca_first_component",
    "deflate_columns",
    "l1pca_components",
    "l1_2dpca_first_component",
    "l1_2dpca_components",
    "l2pca_components",
    "l2_2dpca_components",
    "l1pca_oracle",
    "l1_rowdata_oracle",
    "power_iteration_components",
]

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 1000


@dataclass
class PrincipalDirection:
    """A learned unit direction with its L1 objective and iteration stats."""

    w: np.ndarray
    objective: float
    iterations: int
    converged: bool
    objective_history: list = field(default_factory=list, repr=False)


@dataclass
class RowDataSet:
    """Row vectors pooled from 2-D samples, one row per (sample, row) pair."""

    rows: np.ndarray  # (total_rows, width)
    sample_heights: list = field(default_factory=list)

    @property
    def width(self):
        return self.rows.shape[1]


def _as_columns(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidParameterError(f"expected a 2-D column matrix, got {X.ndim}-D")
    return X


def _as_rows(R):
    if isinstance(R, RowDataSet):
        R = R.rows
    R = np.asarray(R, dtype=np.float64)
    if R.ndim != 2:
        raise InvalidParameterError(f"expected a 2-D row matrix, got {R.ndim}-D")
    return R


def l1_objective(w, X):
    """sum_i |w^T x_i| over the columns of X."""
    X = _as_columns(X)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (X.shape[0],):
        raise InvalidParameterError(
            f"direction length {w.shape} does not match data dim {X.shape[0]}"
        )
    return float(np.abs(w @ X).sum())


def l1pca_first_component(X, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                          track_objective=False):
    """First L1 principal direction of the columns of X.

    Polarity iteration from w(0) = 0; ties (w^T x = 0) take polarity +1.
    Stops when the sup-norm change of w falls below `tol` or after
    `max_iter` iterations (converged=False in that case).
    """
    X = _as_columns(X)
    D, N = X.shape
    if max_iter < 1:
        raise InvalidParameterError("max_iter must be >= 1")
    p = np.ones(N)  # w(0) = 0 makes every w^T x_i = 0, hence +1
    w = np.zeros(D)
    history = []
    converged = False
    t = 0
    for t in range(1, max_iter + 1):
        s = X @ p
        norm = np.linalg.norm(s)
        if norm == 0.0:
            raise DegenerateDataError(
                f"polarity-weighted data sum is zero at iteration {t}"
            )
        w_new = s / norm
        if track_objective:
            history.append(float(np.abs(w_new @ X).sum()))
        if np.max(np.abs(w_new - w)) <= tol:
            w = w_new
            converged = True
            break
        w = w_new
        p = np.where(w @ X >= 0.0, 1.0, -1.0)
    return PrincipalDirection(
        w=w,
        objective=float(np.abs(w @ X).sum()),
        iterations=t,
        converged=converged,
        objective_history=history,
    )


def deflate_columns(X, w):
    """Remove the component along w from every column: x <- x - (w^T x) w."""
    X = _as_columns(X)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (X.shape[0],):
        raise InvalidParameterError("direction/data dimension mismatch")
    return X - np.outer(w, w @ X)


def l1pca_components(X, L, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """L greedy L1-PCA directions via solve-then-deflate."""
    X = _as_columns(X)
    if not 1 <= L <= X.shape[0]:
        raise InvalidParameterError(f"need 1 <= L <= {X.shape[0]}, got {L}")
    out = []
    for comp in range(L):
        try:
            pd = l1pca_first_component(X, tol=tol, max_iter=max_iter)
        except DegenerateDataError as e:
            raise DegenerateDataError(f"component {comp + 1}: {e}") from e
        out.append(pd)
        X = deflate_columns(X, pd.w)
    return out


def l1_2dpca_first_component(R, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                             track_objective=False):
    """First L1 direction for row data; the sum runs over all rows."""
    rows = _as_rows(R)
    # summing p_ij * x_ij^T over rows is the column iteration on rows^T
    return l1pca_first_component(rows.T, tol=tol, max_iter=max_iter,
                                 track_objective=track_objective)


def l1_2dpca_components(R, L, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """L greedy L1-2DPCA directions with row-wise deflation."""
    rows = _as_rows(R)
    if not 1 <= L <= rows.shape[1]:
        raise InvalidParameterError(f"need 1 <= L <= {rows.shape[1]}, got {L}")
    out = []
    for comp in range(L):
        try:
            pd = l1_2dpca_first_component(rows, tol=tol, max_iter=max_iter)
        except DegenerateDataError as e:
            raise DegenerateDataError(f"component {comp + 1}: {e}") from e
        out.append(pd)
        # x_ij <- x_ij - x_ij (w w^T), row vector times projector
        rows = rows - np.outer(rows @ pd.w, pd.w)
    return out


def _fix_signs(vectors):
    """Flip each vector so its largest-magnitude entry is positive."""
    out = []
    for v in vectors:
        i = int(np.argmax(np.abs(v)))
        out.append(-v if v[i] < 0 else v)
    return out


def _top_eigendirections(S, L):
    try:
        vals, vecs = np.linalg.eigh(S)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"eigendecomposition failed: {e}") from e
    order = np.argsort(vals)[::-1][:L]
    dirs = _fix_signs([vecs[:, i] for i in order])
    return [
        PrincipalDirection(w=w, objective=float(vals[i]), iterations=0, converged=True)
        for w, i in zip(dirs, order)
    ]


def l2pca_components(X, L):
    """Top-L eigenvectors of X X^T, largest-magnitude entry made positive."""
    X = _as_columns(X)
    if not 1 <= L <= X.shape[0]:
        raise InvalidParameterError(f"need 1 <= L <= {X.shape[0]}, got {L}")
    return _top_eigendirections(X @ X.T, L)


def l2_2dpca_components(R, L):
    """Top-L eigenvectors of the row scatter sum_ij x_ij^T x_ij."""
    rows = _as_rows(R)
    if not 1 <= L <= rows.shape[1]:
        raise InvalidParameterError(f"need 1 <= L <= {rows.shape[1]}, got {L}")
    return _top_eigendirections(rows.T @ rows, L)


def l1pca_oracle(X):
    """Global L1-PCA optimum by enumerating all 2^N polarity assignments.

    Every local maximum of the fixed-point iteration has the form
    normalize(sum p_i x_i) for some sign vector p, so the best candidate
    over all sign vectors dominates anything the iteration can return.
    """
    X = _as_columns(X)
    D, N = X.shape
    if N > 20:
        raise InvalidParameterError(f"oracle enumeration limited to N <= 20, got {N}")
    # all sign vectors as rows of a (2^N, N) matrix
    codes = np.arange(2 ** N, dtype=np.uint32)
    bits = (codes[:, None] >> np.arange(N)) & 1
    signs = bits.astype(np.float64) * 2.0 - 1.0
    cand = X @ signs.T  # (D, 2^N)
    norms = np.linalg.norm(cand, axis=0)
    ok = norms > 0
    if not ok.any():
        raise DegenerateDataError("every polarity-weighted sum is zero")
    W = cand[:, ok] / norms[ok]
    objs = np.abs(W.T @ X).sum(axis=1)
    best = int(np.argmax(objs))
    return PrincipalDirection(
        w=W[:, best].copy(),
        objective=float(objs[best]),
        iterations=0,
        converged=True,
    )


def l1_rowdata_oracle(R):
    """Sign-enumeration oracle for row data (one sign per row)."""
    return l1pca_oracle(_as_rows(R).T)


def power_iteration_components(S, L, tol=1e-12, max_iter=10000):
    """Deflated power iteration on a symmetric PSD matrix S.

    Independent reference for the eigh-based baselines. Returns top-L
    eigenvectors with the same sign convention.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidParameterError("S must be square")
    n = S.shape[0]
    if not 1 <= L <= n:
        raise InvalidParameterError(f"need 1 <= L <= {n}, got {L}")
    A = S.copy()
    out = []
    for _ in range(L):
        v = np.ones(n) / np.sqrt(n)
        converged = False
        for _ in range(max_iter):
            u = A @ v
            norm = np.linalg.norm(u)
            if norm == 0.0:
                # remaining spectrum is zero; any unit vector in the
                # deflated space works
                u = v
                norm = 1.0
            u = u / norm
            if np.linalg.norm(u - v) <= tol or np.linalg.norm(u + v) <= tol:
                v = u
                converged = True
                break
            v = u
        if not converged:
            raise NumericError("power iteration did not converge")
        lam = float(v @ A @ v)
        out.append((_fix_signs([v])[0], lam))
        A = A - lam * np.outer(v, v)
    return [
        PrincipalDirection(w=w, objective=lam, iterations=0, converged=True)
        for w, lam in out
    ]
