import numpy as np
import pytest

from ballcap import kernels
from ballcap.kernels import (
    CoefficientSequence,
    DimensionMismatchError,
    KernelError,
    SeriesDivergenceError,
    base_values,
    custom_kernel,
    eval_gramian,
    eval_kernel,
    gramian_diagnostics,
    random_unitary,
)

from conftest import random_ball_points, random_sphere_points

E1 = np.array([1.0 + 0j, 0.0])
E2 = np.array([0.0 + 0j, 1.0])


def test_origin_value_is_one():
    spec = kernels.drury_arveson(2)
    z = np.zeros(2, dtype=complex)
    assert eval_kernel(spec, z, z) == 1.0 + 0j


def test_pluriharmonic_diagonal_closed_form():
    spec = kernels.drury_arveson(2, "pluriharmonic")
    for r in (0.3, 0.5, 0.9):
        val = eval_kernel(spec, E1, E1, r=r)
        assert val == pytest.approx((1 + r * r) / (1 - r * r), rel=1e-14)
    assert eval_kernel(spec, E1, E1, r=0.5) == pytest.approx(5.0 / 3.0, rel=1e-14)


def test_bounded_family_boundary_value():
    spec = kernels.bounded(0.5, 2)
    assert eval_kernel(spec, E1, E1, r=1.0) == pytest.approx(2.0)


def test_coefficient_normalization_enforced():
    with pytest.raises(KernelError):
        CoefficientSequence(np.array([2.0, 1.0]))
    with pytest.raises(KernelError):
        CoefficientSequence(np.array([1.0, -0.5]))


@pytest.mark.parametrize(
    "family,param",
    [
        ("drury-arveson", None),
        ("dirichlet-log", None),
        ("weighted-dirichlet", 0.5),
        ("hardy-poisson", None),
        ("bounded", 0.5),
    ],
)
def test_series_matches_closed_form(family, param, rng):
    spec = kernels.make_kernel(family, 2, "holomorphic", param)
    series_spec = custom_kernel(spec.coefficients, 2, "holomorphic")
    z = random_ball_points(rng, 1000, 2, rmax=0.995)
    w = random_ball_points(rng, 1000, 2, rmax=0.995)
    s = np.einsum("ij,ij->i", z, np.conj(w))
    s = s[np.abs(s) <= 0.99]
    closed = base_values(spec, s)
    series = base_values(series_spec, s, series_tol=1e-12)
    rel = np.abs(closed - series) / np.maximum(np.abs(closed), 1.0)
    assert rel.max() <= 1e-8


def test_hermitian_symmetry(rng):
    spec = kernels.drury_arveson(3)
    z = random_ball_points(rng, 50, 3)
    w = random_ball_points(rng, 50, 3)
    for i in range(50):
        a = eval_kernel(spec, z[i], w[i], r=0.9)
        b = eval_kernel(spec, w[i], z[i], r=0.9)
        assert a == pytest.approx(np.conj(b), abs=1e-12)
    real_spec = kernels.hardy_poisson(3)
    m = kernels.kernel_matrix(real_spec, z, z, rz=0.8)
    assert np.abs(m - m.T).max() <= 1e-12 * np.abs(m).max()


def test_unitary_invariance(rng):
    spec = kernels.weighted_dirichlet(0.5, 2)
    u = random_unitary(2, rng)
    z = random_ball_points(rng, 30, 2)
    w = random_ball_points(rng, 30, 2)
    for i in range(30):
        a = eval_kernel(spec, z[i], w[i], r=0.9)
        b = eval_kernel(spec, u @ z[i], u @ w[i], r=0.9)
        assert a == pytest.approx(b, rel=1e-11, abs=1e-11)


@pytest.mark.parametrize("family,param", [("drury-arveson", None), ("hardy-poisson", None)])
def test_real_gramians_are_psd(family, param, rng):
    spec = kernels.make_kernel(family, 2, "real", param)
    pts = random_sphere_points(rng, 24, 2)
    diag = gramian_diagnostics(spec, pts, 0.9)
    assert diag.psd_defect >= -1e-9 * diag.scale
    assert diag.symmetry_defect <= 1e-12 * diag.scale


def test_gramian_single_origin_point():
    spec = kernels.dirichlet_log(2)
    g = eval_gramian(spec, np.zeros((1, 2), dtype=complex), 0.5)
    assert g.shape == (1, 1)
    assert g[0, 0] == pytest.approx(1.0)


def test_gramian_orthogonal_boundary_points():
    spec = kernels.drury_arveson(2, "pluriharmonic")
    g = eval_gramian(spec, np.vstack([E1, E2]), 0.9)
    diag = (1 + 0.81) / (1 - 0.81)
    assert g[0, 0] == pytest.approx(diag, rel=1e-14)
    assert g[1, 1] == pytest.approx(diag, rel=1e-14)
    assert g[0, 1] == pytest.approx(1.0, abs=1e-14)


def test_circulant_gramian_matches_direct_poisson_formula():
    m, r = 12, 0.8
    spec = kernels.hardy_poisson(1)
    ts = 2 * np.pi * np.arange(m) / m
    pts = np.exp(1j * ts)[:, None]
    g = np.real(eval_gramian(spec, pts, r))
    s = r * r * np.exp(1j * (ts[:, None] - ts[None, :]))
    direct = (1 - np.abs(s) ** 2) / np.abs(1 - s) ** 2
    assert np.abs(g - direct).max() <= 1e-12 * direct.max()
    # circulant structure: first row generates every row
    for i in range(m):
        assert np.allclose(np.roll(g[0], i), g[i], rtol=0, atol=1e-10)


def test_series_divergence_error():
    seq = CoefficientSequence(np.ones(65), truncation_degree=64)
    spec = custom_kernel(seq, 1)
    with pytest.raises(SeriesDivergenceError):
        eval_kernel(spec, np.array([0.95 + 0j]), np.array([0.95 + 0j]))
    # the same request under a closed form family is fine
    assert eval_kernel(kernels.drury_arveson(1), np.array([0.95 + 0j]), np.array([0.95 + 0j]))


def test_boundary_diagonal_divergence():
    spec = kernels.drury_arveson(2)
    with pytest.raises(SeriesDivergenceError):
        eval_kernel(spec, E1, E1, r=1.0)


def test_dimension_mismatch():
    spec = kernels.drury_arveson(2)
    with pytest.raises(DimensionMismatchError):
        eval_kernel(spec, np.array([0.5 + 0j]), np.array([0.5 + 0j, 0.0]))


def test_tail_bound_reported_for_series_family():
    seq = CoefficientSequence(np.ones(257), truncation_degree=256)
    spec = custom_kernel(seq, 1)
    pts = np.array([[0.9 + 0j]])
    diag = gramian_diagnostics(spec, pts, 0.9)
    expected = seq.tail_bound(0.9**4)
    assert diag.truncation_error == pytest.approx(expected)
    assert diag.truncation_error > 0


def test_coefficients_from_file_two_sided(tmp_path):
    path = tmp_path / "coeffs.txt"
    path.write_text("# test sequence\n0 1.0\n1 0.5\n2 0.25\n-1 0.5\n")
    seq = CoefficientSequence.from_file(path, truncation_degree=64)
    assert seq.positive.tolist() == [1.0, 0.5, 0.25]
    assert seq.negative.tolist() == [0.5]
    spec = custom_kernel(seq, 1)
    s = np.array(0.3 + 0.1j)
    expected = 1.0 + 0.5 * s + 0.25 * s * s + 0.5 * np.conj(s)
    assert base_values(spec, s) == pytest.approx(expected, rel=1e-14)


def test_pluriharmonic_variant_consistency():
    # the two-sided unit family evaluates to the pluriharmonic companion of the
    # geometric family
    da = kernels.drury_arveson(2, "pluriharmonic")
    hp = kernels.hardy_poisson(2, "real")
    z = 0.4 * E1 + 0.3j * E2
    w = 0.2 * E1 - 0.5 * E2
    assert eval_kernel(da, z, w, r=0.9) == pytest.approx(
        eval_kernel(hp, z, w, r=0.9), rel=1e-13
    )
