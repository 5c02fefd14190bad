"""Approach-region geometry on the sphere, sampled maximal functions, and the
capacitary weak-type ratio experiment.
"""

from dataclasses import dataclass

import numpy as np

from . import _maxscan
from .backend import maximal_scan
from .capacity import GramianProblem, solve_equilibrium
from .kernels import BOUNDARY_TOL, KernelError, as_point_array
from .measures import finite_points

FAMILY_CODES = {
    ("hardy-poisson", "real"): _maxscan.FAMILY_POISSON,
    ("hardy-poisson", "holomorphic"): _maxscan.FAMILY_POISSON,
    ("drury-arveson", "pluriharmonic"): _maxscan.FAMILY_POISSON,
    ("drury-arveson", "real"): _maxscan.FAMILY_RE_GEOMETRIC,
    ("drury-arveson", "modulus"): _maxscan.FAMILY_ABS_GEOMETRIC,
    ("weighted-dirichlet", "real"): _maxscan.FAMILY_RE_POWER,
    ("dirichlet-log", "real"): _maxscan.FAMILY_RE_LOG,
}


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class KoranyiRegion:
    zeta: np.ndarray
    alpha: float

    def __post_init__(self):
        z = np.asarray(self.zeta, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(z) - 1.0) > BOUNDARY_TOL:
            raise RegionError("region vertex must lie on the sphere")
        if self.alpha <= 1.0:
            raise RegionError("aperture must exceed 1")
        object.__setattr__(self, "zeta", z)


def region_contains(region, z):
    """Exact predicate |1 - <z, zeta>| < (alpha/2) (1 - |z|^2)."""
    zc = np.asarray(z, dtype=complex).reshape(-1)
    ip = complex(np.vdot(region.zeta, zc))  # <z, zeta> = sum z_k conj(zeta_k)
    nz = float(np.real(np.vdot(zc, zc)))
    return abs(1.0 - ip) < 0.5 * region.alpha * (1.0 - nz)


def koranyi_distance(a, b):
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    return float(np.sqrt(abs(1.0 - complex(np.vdot(b, a)))))


def triangle_residual(a, b, c):
    """d(a,c) - d(a,b) - d(b,c); nonpositive values confirm the triangle inequality."""
    return koranyi_distance(a, c) - koranyi_distance(a, b) - koranyi_distance(b, c)


def _poisson_value(s):
    return (1.0 - abs(s) ** 2) / abs(1.0 - s) ** 2


def comparability_ratio(zeta, w, psi_point, alpha):
    """Ratio k(psi, w) / k(zeta, w) for the pluriharmonic geometric kernel.

    Preconditions: psi_point inside the aperture-alpha region at zeta,
    ||psi_point|| >= ||w||, and w interior.
    """
    region = KoranyiRegion(np.asarray(zeta, dtype=complex), alpha)
    psi = np.asarray(psi_point, dtype=complex).reshape(-1)
    w = np.asarray(w, dtype=complex).reshape(-1)
    if np.linalg.norm(w) >= 1.0:
        raise RegionError("w must be interior")
    if np.linalg.norm(psi) < np.linalg.norm(w) - BOUNDARY_TOL:
        raise RegionError("psi must dominate w in norm")
    if not region_contains(region, psi):
        raise RegionError("psi lies outside the approach region")
    num = _poisson_value(complex(np.vdot(w, psi)))
    den = _poisson_value(complex(np.vdot(w, region.zeta)))
    return num / den


def kernel_comparison_bound(alpha, n_draws=100_000, seed=11, dimension=2):
    """Empirical constant in |1 - <zeta, w>| <= C |1 - <psi(zeta), w>|.

    Draws random admissible (zeta, psi, w) triples; psi is produced by the same
    anisotropic parameterization used for maximal sampling.
    """
    rng = np.random.default_rng(seed)
    zs = _random_sphere(rng, n_draws, dimension)
    ws = _random_ball(rng, n_draws, dimension)
    s = 1.0 - rng.uniform(0.01, 0.9, n_draws) ** 2
    dirs = _tangent_samples(rng, zs)
    th = rng.uniform(0.0, 1.0, n_draws) * np.sqrt(alpha * (1.0 - s * s))
    psi = s[:, None] * (
        np.cos(th)[:, None] * zs + np.sin(th)[:, None] * dirs
    )
    ip_psi_z = np.einsum("ij,ij->i", psi, np.conj(zs))
    admissible = np.abs(1.0 - ip_psi_z) < 0.5 * alpha * (1.0 - s * s)
    num = np.abs(1.0 - np.einsum("ij,ij->i", zs, np.conj(ws)))
    den = np.abs(1.0 - np.einsum("ij,ij->i", psi, np.conj(ws)))
    ratio = num[admissible] / den[admissible]
    return float(ratio.max()), int(admissible.sum())


def _random_sphere(rng, n, d):
    v = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    return v / np.linalg.norm(v, axis=1)[:, None]


def _random_ball(rng, n, d):
    v = _random_sphere(rng, n, d)
    radii = rng.uniform(0.0, 1.0, n) ** (1.0 / (2 * d))
    return v * radii[:, None]


def _tangent_samples(rng, zetas):
    """One random unit tangent per row (real-orthogonal to the base point)."""
    n, d = zetas.shape
    v = rng.normal(size=(n, d)) + 1j * rng.normal(size=(n, d))
    proj = np.einsum("ij,ij->i", v, np.conj(zetas)).real
    v = v - proj[:, None] * zetas
    return v / np.linalg.norm(v, axis=1)[:, None]


def tangent_directions(zeta, n_dirs, rng):
    """Deterministic (given rng) unit tangent directions at a boundary point."""
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    d = zeta.size
    dirs = np.empty((n_dirs, d), dtype=complex)
    # always include the rotational direction i*zeta; it probes the narrow axis
    dirs[0] = 1j * zeta
    for t in range(1, n_dirs):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        # remove the real span of {zeta, i*zeta}
        v = v - np.real(np.vdot(zeta, v)) * zeta
        v = v - np.real(np.vdot(1j * zeta, v)) * (1j * zeta)
        nv = np.linalg.norm(v)
        if nv < 1e-12:
            dirs[t] = 1j * zeta
            continue
        # mix in the rotational axis so both anisotropy scales get coverage
        phi = rng.uniform(0.0, np.pi)
        v = np.cos(phi) * (v / nv) + np.sin(phi) * (1j * zeta)
        dirs[t] = v / np.linalg.norm(v)
    return dirs


def boundary_grid(dimension, size, seed=5):
    """Deterministic boundary sample: circle roots (d=1), a product grid on the
    three-sphere (d=2), seeded quasi-uniform points otherwise."""
    if dimension == 1:
        ts = 2.0 * np.pi * np.arange(size) / size
        return np.exp(1j * ts)[:, None]
    if dimension == 2:
        best = None
        for a in range(2, size + 1):
            if size % a:
                continue
            rest = size // a
            for b in range(2, rest + 1):
                if rest % b:
                    continue
                c = rest // b
                shape = (a, b, c)
                score = max(shape) / min(shape)
                if best is None or score < best[0]:
                    best = (score, shape)
        if best is None:
            best = (1.0, (1, 1, size))
        na, nb, nc = best[1]
        eta = (np.arange(na) + 0.5) * (np.pi / 2.0) / na
        p1 = 2.0 * np.pi * np.arange(nb) / nb
        p2 = 2.0 * np.pi * np.arange(nc) / nc
        e, f1, f2 = np.meshgrid(eta, p1, p2, indexing="ij")
        pts = np.column_stack(
            [
                (np.cos(e) * np.exp(1j * f1)).ravel(),
                (np.sin(e) * np.exp(1j * f2)).ravel(),
            ]
        )
        return pts
    rng = np.random.default_rng(seed)
    return _random_sphere(rng, size, dimension)


@dataclass
class SampleScheme:
    n_radial: int = 64
    n_theta: int = 32
    n_tangential: int = 8
    r_max: float = 1.0 - 2.0**-12
    seed: int = 5

    def radii(self):
        # geometric approach toward r_max resolves the shrinking region depth
        ks = np.linspace(0.5, -np.log2(1.0 - self.r_max), self.n_radial)
        return 1.0 - 2.0 ** (-ks)


@dataclass
class MaximalSample:
    zetas: np.ndarray
    alphas: list
    sups: np.ndarray  # (n_points, n_alphas), honest lower bounds of M_alpha f
    scheme: SampleScheme


@dataclass(frozen=True)
class KernelCombination:
    """f(z) = sum_k c_k kappa(<z, w_k>) for a real closed-form kernel kappa."""

    atoms: np.ndarray
    coefficients: np.ndarray
    family_code: int
    parameter: float = 0.0
    norm_sq: float = 1.0
    label: str = "potential"

    def eval(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        s = pts @ np.conj(self.atoms).T
        vals = _maxscan._kernel_values_np(s, self.family_code, self.parameter)
        return vals @ self.coefficients


def normalized_kernel_function(spec, w, label=None):
    """The normalized reproducing element at an interior point (unit norm)."""
    code = FAMILY_CODES.get((spec.family, spec.variant))
    if code is None:
        raise KernelError(
            f"no closed-form scan kernel for {spec.family}/{spec.variant}"
        )
    w = np.asarray(w, dtype=complex).reshape(1, -1)
    s0 = complex((w @ np.conj(w).T)[0, 0])
    k_ww = float(_maxscan._kernel_values_np(np.array([[s0]]), code, spec.parameter or 0.0)[0, 0])
    return KernelCombination(
        w,
        np.array([1.0 / np.sqrt(k_ww)]),
        code,
        spec.parameter or 0.0,
        1.0,
        label or "normalized-kernel",
    )


def equilibrium_potential_function(spec, set_desc, r, label=None, **solve_kwargs):
    """Unit-normalized equilibrium potential of a discretized set.

    The potential dilates both kernel arguments by r, so as a kernel
    combination its atoms sit at radius r^2 and its exact squared norm is the
    radius-r^2 energy of the equilibrium weights.
    """
    code = FAMILY_CODES.get((spec.family, spec.variant))
    if code is None:
        raise KernelError(
            f"no closed-form scan kernel for {spec.family}/{spec.variant}"
        )
    points = set_desc.discretize()
    eq = solve_equilibrium(GramianProblem.from_spec(spec, points, r), **solve_kwargs)
    g2 = GramianProblem.from_spec(spec, points, r * r).gramian
    nsq = float(eq.weights @ g2 @ eq.weights)
    coefs = eq.weights / np.sqrt(nsq)
    return KernelCombination(
        (r * r) * points,
        coefs,
        code,
        spec.parameter or 0.0,
        1.0,
        label or "equilibrium-potential",
    )


def maximal_sample(func, zetas, alphas, scheme=None):
    """Sampled maximal-function lower bounds, shared candidates across apertures."""
    scheme = scheme or SampleScheme()
    zetas = as_point_array(zetas)
    rng = np.random.default_rng(scheme.seed)
    alphas_arr = np.asarray(sorted(alphas), dtype=float)
    svals = scheme.radii()
    thetas = _maxscan.theta_grid(svals, float(alphas_arr.max()), scheme.n_theta)
    n_b, d = zetas.shape
    n_t = scheme.n_tangential
    dirs = np.empty((n_b, n_t, d), dtype=complex)
    for i in range(n_b):
        dirs[i] = tangent_directions(zetas[i], n_t, rng)
    zw = zetas @ np.conj(func.atoms).T
    uw = np.einsum("btd,kd->btk", dirs, np.conj(func.atoms))
    uz = np.einsum("btd,bd->bt", dirs, np.conj(zetas))
    sups = maximal_scan(
        np.ascontiguousarray(zw),
        np.ascontiguousarray(uw),
        np.ascontiguousarray(uz),
        np.ascontiguousarray(func.coefficients, dtype=float),
        func.family_code,
        float(func.parameter),
        alphas_arr,
        svals,
        thetas,
    )
    order = np.argsort(np.argsort([float(a) for a in alphas]))
    return MaximalSample(zetas, list(alphas), sups[:, order], scheme)


def maximal_sample_polynomial(poly, zetas, alphas, scheme=None):
    """Polynomial variant of the scan (vectorized; no accelerated twin)."""
    scheme = scheme or SampleScheme()
    zetas = as_point_array(zetas)
    rng = np.random.default_rng(scheme.seed)
    alphas_sorted = np.asarray(sorted(alphas), dtype=float)
    svals = scheme.radii()
    thetas = _maxscan.theta_grid(svals, float(alphas_sorted.max()), scheme.n_theta)
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    a = svals[:, None] * cos_t
    b = svals[:, None] * sin_t
    lim = 1.0 - svals[:, None] ** 2
    n_b, d = zetas.shape
    sups = np.zeros((n_b, alphas_sorted.size))
    for ib in range(n_b):
        dirs = tangent_directions(zetas[ib], scheme.n_tangential, rng)
        z = (
            a[None, :, :, None] * zetas[ib][None, None, None, :]
            + b[None, :, :, None] * dirs[:, None, None, :]
        )
        sz = a[None, :, :] + b[None, :, :] * np.einsum(
            "td,d->t", dirs, np.conj(zetas[ib])
        )[:, None, None]
        dist = np.abs(1.0 - sz)
        fv = np.abs(poly.eval(z.reshape(-1, d))).reshape(z.shape[:3])
        for ia, alpha in enumerate(alphas_sorted):
            mask = dist < 0.5 * alpha * lim[None, :, :]
            if mask.any():
                sups[ib, ia] = fv[mask].max()
    order = np.argsort(np.argsort([float(x) for x in alphas]))
    return MaximalSample(zetas, list(alphas), sups[:, order], scheme)


@dataclass
class WeakTypeRow:
    label: str
    alpha: float
    t: float
    superlevel_count: int
    cap_estimate: float
    ratio: float


@dataclass
class WeakTypeTable:
    rows: list
    grid_size: int
    cap_radius: float

    def max_ratio(self):
        finite = [row.ratio for row in self.rows if np.isfinite(row.ratio)]
        return max(finite) if finite else 0.0

    def to_dict(self):
        return {
            "schema": "ballcap/weak-type/v1",
            "grid_size": self.grid_size,
            "cap_radius": self.cap_radius,
            "max_ratio": self.max_ratio(),
            "rows": [
                {
                    "label": r.label,
                    "alpha": r.alpha,
                    "t": r.t,
                    "superlevel_count": r.superlevel_count,
                    "cap_estimate": r.cap_estimate,
                    "ratio": r.ratio,
                }
                for r in self.rows
            ],
        }


def weak_type_experiment(
    spec,
    functions,
    alphas,
    t_grids,
    grid_size=512,
    cap_radius=1.0 - 2.0**-6,
    scheme=None,
    seed=5,
    solver_tol=1e-9,
    solver_gap_abs=1e-8,
):
    """Capacitary weak-type ratios cap({M_alpha f > t}) * t^2 / ||f||^2.

    Superlevel sets are read off a fixed boundary grid; their capacity is the
    finite-set inner estimate at cap_radius.  Ratios for empty superlevel sets
    are recorded as 0.
    """
    zetas = boundary_grid(spec.dimension, grid_size, seed)
    rows = []
    for func, t_grid in zip(functions, t_grids):
        if isinstance(func, KernelCombination):
            sample = maximal_sample(func, zetas, alphas, scheme)
            norm_sq = func.norm_sq
            label = func.label
        else:
            sample = maximal_sample_polynomial(func, zetas, alphas, scheme)
            norm_sq = func.norm_sq(spec)
            label = f"poly[{func.coefficients.size}]"
        for ia, alpha in enumerate(sample.alphas):
            sups = sample.sups[:, ia]
            for t in t_grid:
                mask = sups > t
                count = int(mask.sum())
                if count == 0:
                    rows.append(WeakTypeRow(label, float(alpha), float(t), 0, 0.0, 0.0))
                    continue
                sub = finite_points(zetas[mask], spec.dimension)
                problem = GramianProblem.from_spec(
                    spec, sub.discretize(), cap_radius
                )
                eq = solve_equilibrium(
                    problem, tol=solver_tol, gap_abs=solver_gap_abs, strict=False
                )
                ratio = eq.cap_r * t * t / norm_sq
                rows.append(
                    WeakTypeRow(label, float(alpha), float(t), count, eq.cap_r, ratio)
                )
    return WeakTypeTable(rows, grid_size, cap_radius)
