"""Unitarily invariant kernels on the complex unit ball.

A kernel is determined by a two-sided coefficient sequence (a_n) with a_0 = 1,
a_n >= 0, evaluated at the scalar inner product s = <z, w>:

    base(s) = sum_{n>=0} a_n s^n + sum_{n>=1} a_{-n} conj(s)^n

Four evaluation variants derive from the base value: the holomorphic value
itself, its real part, the pluriharmonic companion 2*Re(K_+) - 1 built from the
nonnegative-index coefficients, and the modulus.  The named families carry
closed forms that stay valid arbitrarily close to the boundary; everything else
falls back to a truncated series with an explicit tail bound.
"""

from dataclasses import dataclass, field
from math import lgamma

import numpy as np

from .backend import series_eval

VARIANTS = ("holomorphic", "real", "pluriharmonic", "modulus")

FAMILIES = (
    "drury-arveson",
    "dirichlet-log",
    "weighted-dirichlet",
    "hardy-poisson",
    "bounded",
    "custom",
)

BOUNDARY_TOL = 1e-12


class KernelError(ValueError):
    pass


class DimensionMismatchError(KernelError):
    pass


class SeriesDivergenceError(KernelError):
    """Tail bound of the truncated series exceeds the requested tolerance."""


@dataclass(frozen=True)
class CoefficientSequence:
    """Two-sided coefficient sequence; ``negative[j]`` holds a_{-(j+1)}."""

    positive: np.ndarray
    negative: np.ndarray = field(default_factory=lambda: np.zeros(0))
    truncation_degree: int = 4096

    def __post_init__(self):
        pos = np.asarray(self.positive, dtype=float)
        neg = np.asarray(self.negative, dtype=float)
        object.__setattr__(self, "positive", pos)
        object.__setattr__(self, "negative", neg)
        if pos.size == 0 or abs(pos[0] - 1.0) > 1e-14:
            raise KernelError("coefficient normalization requires a_0 = 1")
        if (pos < 0).any() or (neg < 0).any():
            raise KernelError("kernel coefficients must be nonnegative")
        if self.truncation_degree < 1:
            raise KernelError("truncation degree must be positive")

    @property
    def coefficient_bound(self):
        m = self.positive.max()
        if self.negative.size:
            m = max(m, self.negative.max())
        return float(m)

    def tail_bound(self, rho):
        """Geometric tail bound for truncation at the stored degree."""
        rho = float(rho)
        if rho >= 1.0:
            return np.inf
        n = self.truncation_degree
        sides = 2.0 if self.negative.size else 1.0
        return sides * self.coefficient_bound * rho ** (n + 1) / (1.0 - rho)

    @classmethod
    def from_file(cls, path, truncation_degree=4096):
        """Load 'index value' rows; negative indices feed the conjugate branch."""
        entries = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                idx_str, val_str = line.split()[:2]
                entries[int(idx_str)] = float(val_str)
        if not entries:
            raise KernelError(f"no coefficients found in {path}")
        npos = max(max(entries), 0) + 1
        nneg = max(-min(entries), 0)
        pos = np.zeros(npos)
        neg = np.zeros(nneg)
        for idx, val in entries.items():
            if idx >= 0:
                pos[idx] = val
            else:
                neg[-idx - 1] = val
        return cls(pos, neg, truncation_degree)


def _weighted_dirichlet_coeffs(a, n):
    # a_k = Gamma(k+a) / (Gamma(a) k!)
    ks = np.arange(n + 1, dtype=float)
    out = np.exp(
        np.vectorize(lgamma)(ks + a) - lgamma(a) - np.vectorize(lgamma)(ks + 1.0)
    )
    out[0] = 1.0
    return out


def family_coefficients(family, parameter=None, degree=4096):
    if family == "drury-arveson":
        return CoefficientSequence(np.ones(degree + 1), truncation_degree=degree)
    if family == "dirichlet-log":
        pos = np.ones(degree + 1)
        pos[1:] = 1.0 / np.arange(1, degree + 1)
        return CoefficientSequence(pos, truncation_degree=degree)
    if family == "weighted-dirichlet":
        if parameter is None or not 0.0 < parameter < 1.0:
            raise KernelError("weighted-dirichlet requires a parameter in (0, 1)")
        return CoefficientSequence(
            _weighted_dirichlet_coeffs(parameter, degree), truncation_degree=degree
        )
    if family == "hardy-poisson":
        ones = np.ones(degree + 1)
        return CoefficientSequence(ones, ones[1:], truncation_degree=degree)
    if family == "bounded":
        if parameter is None or not 0.0 < parameter <= 1.0:
            raise KernelError("bounded family requires a ratio parameter in (0, 1]")
        return CoefficientSequence(
            parameter ** np.arange(degree + 1.0), truncation_degree=degree
        )
    raise KernelError(f"unknown kernel family {family!r}")


@dataclass(frozen=True)
class KernelSpec:
    dimension: int
    coefficients: CoefficientSequence
    variant: str = "holomorphic"
    family: str = "custom"
    parameter: float | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise KernelError("dimension must be >= 1")
        if self.variant not in VARIANTS:
            raise KernelError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.family not in FAMILIES:
            raise KernelError(f"family must be one of {FAMILIES}, got {self.family!r}")

    @property
    def is_real_valued(self):
        return self.variant in ("real", "pluriharmonic", "modulus") or (
            self.family == "hardy-poisson"
        )

    def with_variant(self, variant):
        return KernelSpec(
            self.dimension, self.coefficients, variant, self.family, self.parameter
        )


def make_kernel(family, dimension, variant="holomorphic", parameter=None, degree=4096):
    coeffs = family_coefficients(family, parameter, degree)
    return KernelSpec(dimension, coeffs, variant, family, parameter)


def drury_arveson(dimension, variant="holomorphic", degree=4096):
    return make_kernel("drury-arveson", dimension, variant, degree=degree)


def dirichlet_log(dimension, variant="holomorphic", degree=4096):
    return make_kernel("dirichlet-log", dimension, variant, degree=degree)


def weighted_dirichlet(parameter, dimension, variant="holomorphic", degree=4096):
    return make_kernel("weighted-dirichlet", dimension, variant, parameter, degree)


def hardy_poisson(dimension, variant="real", degree=4096):
    return make_kernel("hardy-poisson", dimension, variant, degree=degree)


def bounded(parameter, dimension, variant="holomorphic", degree=4096):
    return make_kernel("bounded", dimension, variant, parameter, degree)


def custom_kernel(coefficients, dimension, variant="holomorphic"):
    return KernelSpec(dimension, coefficients, variant, "custom")


@dataclass(frozen=True)
class BallPoint:
    """A point of the closed unit ball in C^d."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=complex).reshape(-1)
        object.__setattr__(self, "coords", c)
        if self.norm > 1.0 + BOUNDARY_TOL:
            raise KernelError(f"point lies outside the closed ball: |z| = {self.norm}")

    @property
    def norm(self):
        return float(np.linalg.norm(self.coords))

    @property
    def dimension(self):
        return self.coords.size

    @property
    def on_boundary(self):
        return abs(self.norm - 1.0) <= BOUNDARY_TOL


def boundary_point(coords):
    p = BallPoint(np.asarray(coords, dtype=complex))
    if not p.on_boundary:
        raise KernelError("expected a point on the unit sphere")
    return p


def as_point_array(points, dimension=None):
    """Coerce BallPoints / sequences / (n, d) arrays to a complex (n, d) array."""
    if isinstance(points, BallPoint):
        arr = points.coords.reshape(1, -1)
    elif isinstance(points, np.ndarray) and points.ndim == 2:
        arr = np.asarray(points, dtype=complex)
    else:
        rows = [
            p.coords if isinstance(p, BallPoint) else np.asarray(p, dtype=complex)
            for p in points
        ]
        arr = np.vstack([r.reshape(1, -1) for r in rows])
    if dimension is not None and arr.shape[1] != dimension:
        raise DimensionMismatchError(
            f"points have dimension {arr.shape[1]}, kernel expects {dimension}"
        )
    return arr


_CLOSED_FORM_FAMILIES = (
    "drury-arveson",
    "dirichlet-log",
    "weighted-dirichlet",
    "hardy-poisson",
    "bounded",
)


def _closed_form_base(spec, s):
    f = spec.family
    if f == "drury-arveson":
        return 1.0 / (1.0 - s)
    if f == "weighted-dirichlet":
        return np.exp(-spec.parameter * np.log(1.0 - s))
    if f == "dirichlet-log":
        return 1.0 - np.log(1.0 - s)
    if f == "hardy-poisson":
        return (1.0 - np.abs(s) ** 2) / np.abs(1.0 - s) ** 2 + 0j
    if f == "bounded":
        return 1.0 / (1.0 - spec.parameter * s)
    raise KernelError(f"no closed form for family {spec.family!r}")


def _series_base(spec, s, tol):
    coeffs = spec.coefficients
    rho = float(np.abs(s).max()) if np.size(s) else 0.0
    if rho >= 1.0:
        raise SeriesDivergenceError(
            "series evaluation requires |<z, w>| < 1; use a closed-form family"
        )
    bound = coeffs.tail_bound(rho)
    if not np.isfinite(bound) or bound > tol:
        raise SeriesDivergenceError(
            f"series tail bound {bound:.3e} exceeds tolerance {tol:.1e} "
            f"at degree {coeffs.truncation_degree} (|s| <= {rho:.6f})"
        )
    # shrink the Horner degree to what the tail bound actually needs
    n_eff = coeffs.truncation_degree
    if 0.0 < rho < 1.0:
        amax = coeffs.coefficient_bound
        need = np.log(tol * (1.0 - rho) / (2.0 * amax)) / np.log(rho)
        n_eff = int(min(n_eff, max(8.0, np.ceil(need))))
    pos = coeffs.positive[: n_eff + 1]
    neg = coeffs.negative[:n_eff]
    flat = np.ascontiguousarray(s.reshape(-1), dtype=complex)
    return series_eval(pos, neg, flat).reshape(s.shape)


def base_values(spec, s, series_tol=1e-10):
    """Holomorphic-branch base value K_+(s) + conj(K_-(s)) for an array s."""
    s = np.asarray(s, dtype=complex)
    if spec.family in _CLOSED_FORM_FAMILIES:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _closed_form_base(spec, s)
        if not np.isfinite(out).all():
            raise SeriesDivergenceError("kernel diverges at a coincident boundary pair")
        return out
    return _series_base(spec, s, series_tol)


def _positive_part(spec, s, series_tol=1e-10):
    if spec.family in _CLOSED_FORM_FAMILIES and spec.family != "hardy-poisson":
        return _closed_form_base(spec, s)
    if spec.family == "hardy-poisson":
        return 1.0 / (1.0 - s)
    trimmed = KernelSpec(
        spec.dimension,
        CoefficientSequence(
            spec.coefficients.positive,
            truncation_degree=spec.coefficients.truncation_degree,
        ),
        "holomorphic",
        "custom",
    )
    return _series_base(trimmed, np.asarray(s, dtype=complex), series_tol)


def apply_variant(spec, base, s=None, series_tol=1e-10):
    if spec.variant == "holomorphic":
        return base
    if spec.variant == "real":
        return base.real
    if spec.variant == "modulus":
        return np.abs(base)
    # pluriharmonic: 2*Re(positive part) - a_0, built from the nonnegative branch
    if spec.coefficients.negative.size and spec.family != "hardy-poisson":
        pos = _positive_part(spec, s, series_tol)
    elif spec.family == "hardy-poisson":
        return base.real  # already the pluriharmonic companion of its positive part
    else:
        pos = base
    return 2.0 * pos.real - 1.0


def kernel_matrix(spec, zpoints, wpoints, rz=1.0, rw=None, series_tol=1e-10):
    """Variant-evaluated kernel values at (rz * z_i, rw * w_j) pairs."""
    if rw is None:
        rw = rz
    za = as_point_array(zpoints, spec.dimension)
    wa = as_point_array(wpoints, spec.dimension)
    s = (rz * rw) * (za @ wa.conj().T)
    return apply_variant(spec, base_values(spec, s, series_tol), s, series_tol)


def eval_kernel(spec, z, w, r=1.0, series_tol=1e-10):
    """Kernel value at a single pair, dilated by r on both sides."""
    val = kernel_matrix(spec, [z], [w], rz=r, series_tol=series_tol)[0, 0]
    if spec.is_real_valued:
        return float(np.real(val))
    return complex(val)


def eval_gramian(spec, points, r, series_tol=1e-10):
    """Kernel Gramian G[i, j] = k(r p_i, r p_j) at radius r in [0, 1)."""
    if not 0.0 <= r < 1.0:
        raise KernelError("gramian radius must lie in [0, 1)")
    pts = as_point_array(points, spec.dimension)
    if (np.linalg.norm(pts, axis=1) > 1.0 + BOUNDARY_TOL).any():
        raise KernelError("gramian points must lie in the closed ball")
    return kernel_matrix(spec, pts, pts, rz=r, series_tol=series_tol)


@dataclass
class GramianDiagnostics:
    truncation_error: float
    symmetry_defect: float
    psd_defect: float
    scale: float


def gramian_diagnostics(spec, points, r, series_tol=1e-10):
    """Numerical health report for a real-variant Gramian."""
    g = eval_gramian(spec, points, r, series_tol)
    pts = as_point_array(points, spec.dimension)
    rho = r * r * float(np.abs(pts @ pts.conj().T).max())
    trunc = (
        0.0
        if spec.family in _CLOSED_FORM_FAMILIES
        else float(spec.coefficients.tail_bound(rho))
    )
    gr = np.real(g)
    sym = float(np.abs(gr - gr.T).max())
    scale = float(np.abs(gr).max())
    eigs = np.linalg.eigvalsh(0.5 * (gr + gr.T))
    return GramianDiagnostics(trunc, sym, float(min(eigs.min(), 0.0)), scale)


def random_unitary(dimension, rng):
    """Haar-ish unitary via QR of a complex Gaussian matrix."""
    a = rng.normal(size=(dimension, dimension)) + 1j * rng.normal(
        size=(dimension, dimension)
    )
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))
