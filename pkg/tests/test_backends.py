"""Agreement between the numba kernels and the pure-numpy fallback path."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ballcap import _maxscan, _qp, _series

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _identity(f):
    return f


proj_np, solve_np = _qp.build(_identity)
series_np = _series.build(_identity)

if HAVE_NUMBA:
    _jit = numba.njit(fastmath=False)
    proj_nb, solve_nb = _qp.build(_jit)
    series_nb = _series.build(_jit)
    scan_nb = _maxscan.build_numba(_jit)

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")


@given(
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=24),
)
@settings(max_examples=200, deadline=None)
def test_simplex_projection_properties(values):
    v = np.asarray(values, dtype=float)
    p = proj_np(v)
    assert (p >= 0).all()
    assert p.sum() == pytest.approx(1.0, abs=1e-9)
    # idempotence and fixed points
    assert np.abs(proj_np(p.copy()) - p).max() <= 1e-9


def test_simplex_projection_fixed_point():
    v = np.array([0.25, 0.25, 0.5])
    assert np.abs(proj_np(v.copy()) - v).max() <= 1e-15


@needs_numba
def test_simplex_projection_backends_agree(rng):
    for _ in range(50):
        v = rng.normal(size=rng.integers(1, 30))
        assert np.array_equal(proj_np(v.copy()), proj_nb(v.copy()))


def test_series_eval_matches_polyval(rng):
    pos = rng.uniform(0, 1, 40)
    pos[0] = 1.0
    neg = rng.uniform(0, 1, 17)
    s = 0.7 * (rng.normal(size=30) + 1j * rng.normal(size=30))
    s /= max(1.0, np.abs(s).max() / 0.7)
    got = series_np(pos, neg, s.astype(complex))
    expected = np.polyval(pos[::-1], s) + np.conj(s) * np.polyval(
        neg[::-1], np.conj(s)
    )
    assert np.abs(got - expected).max() <= 1e-12


@needs_numba
def test_series_backends_agree(rng):
    pos = rng.uniform(0, 1, 64)
    pos[0] = 1.0
    neg = rng.uniform(0, 1, 63)
    s = (0.5 * (rng.normal(size=100) + 1j * rng.normal(size=100))).astype(complex)
    s /= max(1.0, np.abs(s).max() / 0.9)
    a = series_np(pos, neg, s.copy())
    b = series_nb(pos, neg, s.copy())
    assert np.abs(a - b).max() <= 1e-14


def _random_psd(rng, n):
    a = rng.normal(size=(n, n))
    return a @ a.T + 0.1 * np.eye(n)


@needs_numba
def test_qp_backends_agree(rng):
    for _ in range(10):
        g = _random_psd(rng, int(rng.integers(2, 20)))
        lam_a, e_a, gap_a, *_ = solve_np(g, 1e-10, 1e-10, 50_000)
        lam_b, e_b, gap_b, *_ = solve_nb(g, 1e-10, 1e-10, 50_000)
        assert e_a == pytest.approx(e_b, rel=1e-9)
        assert gap_a <= 1e-9 * max(1.0, e_a)
        assert gap_b <= 1e-9 * max(1.0, e_b)


@needs_numba
def test_maximal_scan_backends_agree(rng):
    n_b, n_t, n_k, n_s, n_th = 6, 3, 4, 10, 7
    zw = rng.normal(size=(n_b, n_k)) + 1j * rng.normal(size=(n_b, n_k))
    zw *= 0.5 / np.abs(zw).max()
    uw = rng.normal(size=(n_b, n_t, n_k)) + 1j * rng.normal(size=(n_b, n_t, n_k))
    uw *= 0.5 / np.abs(uw).max()
    uz = rng.normal(size=(n_b, n_t)) + 1j * rng.normal(size=(n_b, n_t))
    uz *= 0.5 / np.abs(uz).max()
    coefs = rng.uniform(0.1, 1.0, n_k)
    alphas = np.array([1.5, 3.0])
    svals = np.linspace(0.1, 0.9, n_s)
    thetas = _maxscan.theta_grid(svals, 3.0, n_th)
    for family, par in ((0, 0.0), (1, 0.0), (2, 0.5), (3, 0.0), (4, 0.0)):
        a = _maxscan.scan_numpy(zw, uw, uz, coefs, family, par, alphas, svals, thetas)
        b = scan_nb(zw, uw, uz, coefs, family, par, alphas, svals, thetas)
        assert np.abs(a - b).max() <= 1e-12


def test_backend_env_flag_selects_numpy(tmp_path):
    import subprocess
    import sys

    code = "import ballcap; print(ballcap.BACKEND)"
    out = subprocess.run(
        [sys.executable, "-c", code],
        env={"BALLCAP_BACKEND": "numpy", "PATH": "/usr/bin:/bin"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"
