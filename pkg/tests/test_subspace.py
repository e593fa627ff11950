"""Tests for the L1/L2 subspace solvers and their verification oracles."""

import numpy as np
import pytest

from l1pcanet import subspace as ss
from l1pcanet.errors import DegenerateDataError, InvalidParameterError
from l1pcanet.rng import derive_rng


# --- objective -------------------------------------------------------------

def test_l1_objective_axis_aligned():
    X = np.array([[1.0, 2.0], [0.0, 0.0]])
    assert ss.l1_objective(np.array([1.0, 0.0]), X) == 3.0


def test_l1_objective_empty_data():
    X = np.zeros((2, 0))
    assert ss.l1_objective(np.array([0.6, 0.8]), X) == 0.0


def test_l1_objective_diagonal_direction():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    w = np.array([1.0, 1.0]) / np.sqrt(2.0)
    assert ss.l1_objective(w, X) == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_l1_objective_dimension_mismatch():
    with pytest.raises(InvalidParameterError):
        ss.l1_objective(np.array([1.0, 0.0, 0.0]), np.eye(2))


# --- first component -------------------------------------------------------

def test_first_component_rank1_data():
    # rank-1 data whose all-(+1) polarity sum is nonzero
    X = np.array([[2.0, -3.0, 2.0], [0.0, 0.0, 0.0]])
    pd = ss.l1pca_first_component(X)
    assert pd.converged
    np.testing.assert_allclose(np.abs(pd.w), [1.0, 0.0], atol=1e-12)
    assert pd.objective == pytest.approx(7.0, abs=1e-9)


def test_first_component_degenerate_initial_sum():
    # the all-(+1) start makes the polarity-weighted sum exactly zero
    X = np.array([[2.0, -3.0, 1.0], [0.0, 0.0, 0.0]])
    with pytest.raises(DegenerateDataError):
        ss.l1pca_first_component(X)


def test_first_component_two_axes():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    pd = ss.l1pca_first_component(X)
    np.testing.assert_allclose(pd.w, np.array([1.0, 1.0]) / np.sqrt(2.0), atol=1e-12)
    assert pd.objective == pytest.approx(np.sqrt(2.0), abs=1e-9)
    # enumeration oracle agrees this is the global optimum
    assert ss.l1pca_oracle(X).objective == pytest.approx(pd.objective, abs=1e-12)


def test_first_component_hand_traced_fixed_point():
    # from w(0)=0 the first step normalizes (1,1)+(1,-1) = (2,0) -> (1,0),
    # which is already a fixed point with objective 2
    X = np.array([[1.0, 1.0], [1.0, -1.0]])
    pd = ss.l1pca_first_component(X)
    assert pd.converged and pd.iterations <= 3
    np.testing.assert_allclose(pd.w, [1.0, 0.0], atol=1e-12)
    assert pd.objective == pytest.approx(2.0, abs=1e-12)
    assert ss.l1pca_oracle(X).objective == pytest.approx(2.0, abs=1e-12)


def test_first_component_unit_norm_and_stats():
    for trial in range(50):
        rng = derive_rng(11, "unit", trial)
        X = rng.standard_normal((3, 8))
        pd = ss.l1pca_first_component(X, track_objective=True)
        assert abs(np.linalg.norm(pd.w) - 1.0) <= 1e-12
        assert pd.converged and pd.iterations <= ss.DEFAULT_MAX_ITER
        assert pd.objective == pytest.approx(ss.l1_objective(pd.w, X), abs=1e-9)
        # recorded objective sequence is nondecreasing
        hist = pd.objective_history
        assert all(b >= a - 1e-9 for a, b in zip(hist, hist[1:]))


def test_first_component_fixed_point_identity():
    for trial in range(50):
        rng = derive_rng(12, "fixed", trial)
        X = rng.standard_normal((3, 10))
        pd = ss.l1pca_first_component(X)
        p = np.where(pd.w @ X >= 0.0, 1.0, -1.0)
        s = X @ p
        np.testing.assert_allclose(pd.w, s / np.linalg.norm(s), atol=1e-10)


# --- deflation ---------------------------------------------------------------

def test_deflate_projection():
    X = np.array([[1.0], [1.0]])
    out = ss.deflate_columns(X, np.array([1.0, 0.0]))
    np.testing.assert_allclose(out[:, 0], [0.0, 1.0])


def test_deflate_orthogonal_column_unchanged():
    X = np.array([[0.0], [3.0]])
    out = ss.deflate_columns(X, np.array([1.0, 0.0]))
    np.testing.assert_allclose(out, X)


def test_deflate_parallel_column_vanishes():
    w = np.array([0.6, 0.8])
    out = ss.deflate_columns(w[:, None], w)
    np.testing.assert_allclose(out, 0.0, atol=1e-12)


def test_deflated_data_is_orthogonal_to_direction():
    rng = derive_rng(13, "deflate")
    X = rng.standard_normal((4, 12))
    w = rng.standard_normal(4)
    w /= np.linalg.norm(w)
    out = ss.deflate_columns(X, w)
    assert np.abs(w @ out).max() <= 1e-9


def test_l1pca_components_orthogonal():
    rng = derive_rng(14, "components")
    X = rng.standard_normal((2, 9))
    dirs = ss.l1pca_components(X, 2)
    assert len(dirs) == 2
    assert abs(dirs[0].w @ dirs[1].w) <= 1e-8


def test_l1pca_components_rank1_second_component_degenerate():
    X = np.outer([1.0, 2.0], [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateDataError, match="component 2"):
        ss.l1pca_components(X, 2)


def test_l1pca_components_matches_oracle_first_direction():
    for trial in range(20):
        X = derive_rng(15, "oracle1", trial).standard_normal((3, 8))
        got = ss.l1pca_components(X, 1)[0].objective
        best = ss.l1pca_oracle(X).objective
        assert got <= best + 1e-9


# --- 2-D (row data) solvers --------------------------------------------------

def test_row_solver_rank1_rows():
    rows = np.tile([1.0, 0.0], (6, 1))
    pd = ss.l1_2dpca_first_component(rows)
    np.testing.assert_allclose(pd.w, [1.0, 0.0], atol=1e-12)


def test_row_solver_two_basis_rows():
    rows = np.array([[1.0, 0.0], [0.0, 1.0]])
    pd = ss.l1_2dpca_first_component(rows)
    np.testing.assert_allclose(pd.w, np.array([1.0, 1.0]) / np.sqrt(2.0), atol=1e-12)
    assert pd.objective == pytest.approx(np.sqrt(2.0), abs=1e-9)
    assert ss.l1_rowdata_oracle(rows).objective == pytest.approx(
        pd.objective, abs=1e-12)


def test_row_solver_reduces_to_column_solver():
    X = derive_rng(16, "reduce").standard_normal((3, 7))
    a = ss.l1pca_first_component(X)
    b = ss.l1_2dpca_first_component(X.T)  # one row per column
    np.testing.assert_allclose(a.w, b.w, atol=1e-12)
    assert a.objective == pytest.approx(b.objective, abs=1e-12)


def test_row_components_orthogonal_pair():
    rows = derive_rng(17, "rowpair").standard_normal((10, 2))
    dirs = ss.l1_2dpca_components(rows, 2)
    assert abs(dirs[0].w @ dirs[1].w) <= 1e-8


def test_row_components_all_zero_rows_degenerate():
    with pytest.raises(DegenerateDataError, match="component 1"):
        ss.l1_2dpca_components(np.zeros((4, 3)), 1)


def test_row_components_bounded_by_oracle():
    for trial in range(20):
        rows = derive_rng(18, "rowbound", trial).standard_normal((6, 3))
        pd = ss.l1_2dpca_components(rows, 1)[0]
        assert pd.objective <= ss.l1_rowdata_oracle(rows).objective + 1e-9


def test_row_deflation_follows_projector_update():
    rows = derive_rng(19, "rowproj").standard_normal((8, 4))
    dirs = ss.l1_2dpca_components(rows, 2)
    # after removing the first direction by the row-vector update, the
    # remaining rows are orthogonal to it
    deflated = rows - np.outer(rows @ dirs[0].w, dirs[0].w)
    assert np.abs(deflated @ dirs[0].w).max() <= 1e-8


# --- L2 baselines -------------------------------------------------------------

def test_l2pca_axis_aligned():
    X = np.array([[1.0, -1.0], [0.0, 0.0]])
    d = ss.l2pca_components(X, 1)[0]
    np.testing.assert_allclose(d.w, [1.0, 0.0], atol=1e-12)


def test_l2pca_full_basis_is_orthonormal():
    X = derive_rng(20, "l2full").standard_normal((5, 40))
    dirs = ss.l2pca_components(X, 5)
    W = np.stack([d.w for d in dirs])
    np.testing.assert_allclose(W @ W.T, np.eye(5), atol=1e-8)


def test_l2pca_matches_power_iteration():
    rng = derive_rng(21, "l2power")
    X = rng.standard_normal((25, 200))
    got = ss.l2pca_components(X, 4)
    ref = ss.power_iteration_components(X @ X.T, 4)
    for a, b in zip(got, ref):
        err = min(np.linalg.norm(a.w - b.w), np.linalg.norm(a.w + b.w))
        assert err <= 1e-8


def test_l2_2dpca_rows_along_e1():
    rows = np.tile([2.0, 0.0, 0.0], (5, 1))
    d = ss.l2_2dpca_components(rows, 1)[0]
    np.testing.assert_allclose(d.w, [1.0, 0.0, 0.0], atol=1e-12)


def test_l2_2dpca_degenerate_spectrum_still_orthogonal():
    rows = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    dirs = ss.l2_2dpca_components(rows, 2)
    assert abs(dirs[0].w @ dirs[1].w) <= 1e-8
    assert dirs[0].objective == pytest.approx(dirs[1].objective, abs=1e-9)


def test_l2_2dpca_matches_power_iteration():
    rng = derive_rng(22, "row-power")
    rows = rng.standard_normal((120, 15))
    got = ss.l2_2dpca_components(rows, 4)
    ref = ss.power_iteration_components(rows.T @ rows, 4)
    for a, b in zip(got, ref):
        err = min(np.linalg.norm(a.w - b.w), np.linalg.norm(a.w + b.w))
        assert err <= 1e-8


def test_sign_convention_largest_entry_positive():
    for trial in range(10):
        X = derive_rng(23, "signs", trial).standard_normal((4, 30))
        for d in ss.l2pca_components(X, 4):
            assert d.w[int(np.argmax(np.abs(d.w)))] > 0


# --- oracles -------------------------------------------------------------------

def test_oracle_two_axes_value():
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert ss.l1pca_oracle(X).objective == pytest.approx(np.sqrt(2.0), abs=1e-12)


def test_oracle_rank1_data_sums_magnitudes():
    X = np.outer([0.0, 1.0], [1.5, -2.5, 4.0])
    assert ss.l1pca_oracle(X).objective == pytest.approx(8.0, abs=1e-12)


def test_oracle_single_column():
    x = np.array([3.0, 4.0])
    pd = ss.l1pca_oracle(x[:, None])
    np.testing.assert_allclose(np.abs(pd.w), [0.6, 0.8], atol=1e-12)
    assert pd.objective == pytest.approx(5.0, abs=1e-12)


def test_oracle_refuses_large_n():
    with pytest.raises(InvalidParameterError):
        ss.l1pca_oracle(np.ones((2, 21)))


def test_oracle_dominates_algorithm():
    for trial in range(200):
        rng = derive_rng(24, "dominance", trial)
        X = rng.standard_normal((int(rng.integers(1, 4)), int(rng.integers(1, 13))))
        try:
            pd = ss.l1pca_first_component(X)
        except DegenerateDataError:
            continue
        assert pd.objective <= ss.l1pca_oracle(X).objective + 1e-9


def test_oracle_matches_fine_angular_grid_in_2d():
    """Independent check that the enumeration oracle is the global optimum."""
    thetas = np.linspace(0.0, np.pi, 20000, endpoint=False)
    grid = np.stack([np.cos(thetas), np.sin(thetas)])
    for trial in range(10):
        X = derive_rng(25, "grid", trial).standard_normal((2, 6))
        best_grid = np.abs(grid.T @ X).sum(axis=1).max()
        assert ss.l1pca_oracle(X).objective >= best_grid - 1e-6


# --- robustness -------------------------------------------------------------

def test_l1_beats_l2_under_orthogonal_outliers():
    errs_l1, errs_l2 = [], []
    for trial in range(50):
        rng = derive_rng(26, "robust", trial)
        t = rng.standard_normal(60)
        X = np.stack([t, 0.05 * rng.standard_normal(60)])
        out_idx = rng.choice(60, size=6, replace=False)
        X[0, out_idx] = 0.0
        X[1, out_idx] = 10.0 * rng.choice([-1.0, 1.0], size=6)
        w1 = ss.l1pca_first_component(X).w
        w2 = ss.l2pca_components(X, 1)[0].w
        errs_l1.append(np.arccos(min(1.0, abs(w1[0]))))
        errs_l2.append(np.arccos(min(1.0, abs(w2[0]))))
    assert np.median(errs_l1) < np.median(errs_l2)


def test_l1_l2_agree_on_clean_dominant_direction():
    agree = 0
    for trial in range(50):
        rng = derive_rng(27, "clean", trial)
        t = rng.standard_normal(80)
        X = np.stack([3.0 * t, 0.2 * rng.standard_normal(80)])
        w1 = ss.l1pca_first_component(X).w
        w2 = ss.l2pca_components(X, 1)[0].w
        agree += abs(w1 @ w2) >= 0.99
    assert agree == 50


# --- power iteration reference ----------------------------------------------

def test_power_iteration_on_known_spectrum():
    Q = np.linalg.qr(derive_rng(28, "spectrum").standard_normal((5, 5)))[0]
    vals = np.array([9.0, 5.0, 2.0, 1.0, 0.5])
    S = Q @ np.diag(vals) @ Q.T
    dirs = ss.power_iteration_components(S, 3)
    for d, lam in zip(dirs, vals[:3]):
        assert d.objective == pytest.approx(lam, abs=1e-8)
        np.testing.assert_allclose(S @ d.w, lam * d.w, atol=1e-7)
