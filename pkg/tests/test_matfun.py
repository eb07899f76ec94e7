"""Spectral matrix functions against an independent small-matrix eigen oracle."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from infodyn import matfun
from infodyn.errors import (
    DomainError,
    InvalidInput,
    NotPositiveDefinite,
    SeriesDiverges,
)


def _det_small(a):
    """Cofactor determinant for n <= 3, independent of any LAPACK path."""
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    if n == 2:
        return a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    return (
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def charpoly_eigenvalues(a, grid=4001, tol=1e-13):
    """Eigenvalues of a small symmetric matrix by bisecting det(A - x).

    Scans a Gershgorin interval for sign changes of the characteristic
    polynomial and bisects each bracket.  Only suitable for n <= 3 with
    well-separated spectra, which is all the tests need.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    radius = np.max(np.sum(np.abs(a), axis=1)) + 1.0
    xs = np.linspace(-radius, radius, grid)
    vals = np.array([_det_small(a - x * np.eye(n)) for x in xs])
    roots = []
    for i in range(grid - 1):
        lo, hi = xs[i], xs[i + 1]
        flo, fhi = vals[i], vals[i + 1]
        if flo == 0.0:
            roots.append(lo)
            continue
        if flo * fhi >= 0.0:
            continue
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            fmid = _det_small(a - mid * np.eye(n))
            if fmid == 0.0:
                lo = hi = mid
            elif flo * fmid < 0.0:
                hi = mid
            else:
                lo, flo = mid, fmid
        roots.append(0.5 * (lo + hi))
    return np.array(roots)


def _random_separated_symmetric(rng, n):
    # Diagonally dominant draw keeps eigenvalues ~1 apart so the grid scan
    # of the oracle cannot skip a pair.
    base = np.diag(np.arange(1.0, n + 1.0))
    pert = rng.standard_normal((n, n))
    return base + 0.05 * (pert + pert.T)


def test_spectral_decompose_matches_charpoly_oracle():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3):
        for _ in range(20):
            a = _random_separated_symmetric(rng, n)
            w, q = matfun.spectral_decompose(a)
            w_oracle = charpoly_eigenvalues(a)
            assert len(w_oracle) == n
            assert_allclose(w, np.sort(w_oracle), atol=1e-9)
            assert_allclose(q @ q.T, np.eye(n), atol=1e-12)
            assert_allclose((q * w) @ q.T, matfun.symmetrize(a), atol=1e-12)


def test_spectral_decompose_exchange_matrix():
    w, q = matfun.spectral_decompose([[0.0, 1.0], [1.0, 0.0]])
    assert_allclose(w, [-1.0, 1.0], atol=1e-15)
    assert_allclose(q.T @ q, np.eye(2), atol=1e-15)


def test_symmetrize_rejects_bad_input():
    with pytest.raises(InvalidInput):
        matfun.symmetrize(np.ones((2, 3)))
    with pytest.raises(InvalidInput):
        matfun.symmetrize([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(InvalidInput):
        matfun.symmetrize(np.ones(3))


def test_exp_log_round_trip():
    rng = np.random.default_rng(11)
    for _ in range(10):
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        a = (q * rng.uniform(0.2, 3.0, 4)) @ q.T
        assert_allclose(matfun.expm_sym(matfun.logm_spd(a)), a, atol=1e-10)
        assert_allclose(matfun.logm_spd(matfun.expm_sym(a)), a, atol=1e-10)


def test_det_exp_equals_exp_trace():
    rng = np.random.default_rng(13)
    for _ in range(10):
        a = matfun.symmetrize(rng.standard_normal((5, 5)))
        assert_allclose(
            np.linalg.det(matfun.expm_sym(a)), np.exp(np.trace(a)), rtol=1e-8
        )


def test_trace_log_equals_log_det():
    rng = np.random.default_rng(17)
    for _ in range(10):
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        a = (q * rng.uniform(0.5, 4.0, 4)) @ q.T
        assert_allclose(
            np.trace(matfun.logm_spd(a)), matfun.log_det_spd(a), rtol=1e-8
        )


def test_log_det_frozen_value():
    # diag(2, 8): log det = log 16.
    assert_allclose(
        matfun.log_det_spd(np.diag([2.0, 8.0])), np.log(16.0), rtol=1e-14
    )


def test_sqrt_and_inv_sqrt():
    rng = np.random.default_rng(19)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    a = (q * rng.uniform(0.5, 4.0, 4)) @ q.T
    root = matfun.sqrtm_spd(a)
    assert_allclose(root @ root, a, atol=1e-10)
    inv_root = matfun.inv_sqrtm_spd(a)
    assert_allclose(inv_root @ a @ inv_root, np.eye(4), atol=1e-10)


def test_apply_identity_function_returns_matrix():
    rng = np.random.default_rng(23)
    a = matfun.symmetrize(rng.standard_normal((6, 6)))
    assert_allclose(
        matfun.apply_spectral_function(a, lambda x: x), a, atol=1e-12
    )


def test_apply_spectral_function_domain_error_names_eigenvalue():
    a = np.diag([1.0, -2.0])
    with pytest.raises(DomainError) as excinfo:
        matfun.apply_spectral_function(
            a, np.log, domain=lambda w: w > 0.0, fn_name="log"
        )
    assert "-2.0" in str(excinfo.value)


def test_pd_operations_reject_indefinite():
    a = np.diag([1.0, -1.0])
    for op in (matfun.logm_spd, matfun.sqrtm_spd, matfun.inv_sqrtm_spd,
               matfun.log_det_spd):
        with pytest.raises(NotPositiveDefinite):
            op(a)
    assert not matfun.is_positive_definite(a)
    assert matfun.is_positive_definite(np.diag([2.0, 1.0]))


def test_neumann_inverse_scalar_frozen():
    # (1 + 0.5)^-1 = 2/3; order-1 series gives 1 - 0.5 = 0.5 with bound
    # 0.5^2/(1 - 0.5) = 0.5, which covers the true error 1/6.
    approx, bound = matfun.neumann_inverse(np.array([[0.5]]), order=1)
    assert_allclose(approx, [[0.5]], rtol=1e-15)
    assert_allclose(bound, 0.5, rtol=1e-15)
    assert abs(approx[0, 0] - 2.0 / 3.0) <= bound


def test_neumann_inverse_converges_within_bound():
    rng = np.random.default_rng(29)
    for _ in range(10):
        m = 0.3 * matfun.symmetrize(rng.standard_normal((4, 4)))
        if np.linalg.norm(m, 2) >= 1.0:
            continue
        truth = np.linalg.inv(np.eye(4) + m)
        for order in (0, 1, 3, 6):
            approx, bound = matfun.neumann_inverse(m, order)
            assert np.linalg.norm(approx - truth, 2) <= bound + 1e-14


def test_neumann_inverse_diverges_loudly():
    with pytest.raises(SeriesDiverges):
        matfun.neumann_inverse(np.array([[1.0]]), order=3)
    with pytest.raises(InvalidInput):
        matfun.neumann_inverse(np.array([[0.5]]), order=-1)


def test_expm_general_matches_series_and_rejects_nonsquare():
    # Non-normal block: exp([[0, 1], [-w^2, 0]] t) is the oscillator rotation.
    w, t = 2.0, 0.3
    gen = np.array([[0.0, 1.0], [-(w**2), 0.0]])
    expected = np.array(
        [
            [np.cos(w * t), np.sin(w * t) / w],
            [-w * np.sin(w * t), np.cos(w * t)],
        ]
    )
    assert_allclose(matfun.expm_general(t * gen), expected, atol=1e-12)
    with pytest.raises(InvalidInput):
        matfun.expm_general(np.ones((2, 3)))
