"""Finitely supported measures on the closed unit ball and the boundary sets
used throughout the capacity experiments.

Atoms are stored as a complex (n, d) array.  Weights are kept unnormalized;
``normalized()`` returns the probability rescaling on demand so restrictions
never lose mass information.
"""

from dataclasses import dataclass, field, replace
from itertools import combinations_with_replacement

import numpy as np

from .kernels import BOUNDARY_TOL, KernelError, as_point_array

MOMENT_INDEX_CAP = 2_000_000


class MeasureError(ValueError):
    pass


class ImageOffBallError(MeasureError):
    pass


class MomentBlowupError(MeasureError):
    pass


@dataclass(frozen=True)
class DiscreteMeasure:
    atoms: np.ndarray
    weights: np.ndarray
    is_probability: bool = False
    ambient: str = "ball"  # "torus" marks pre-pushforward product atoms

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.atoms, dtype=complex))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "weights", w)
        if a.shape[0] != w.size:
            raise MeasureError("atom and weight counts differ")
        if (w < 0).any():
            raise MeasureError("weights must be nonnegative")
        if self.ambient == "ball":
            norms = np.linalg.norm(a, axis=1)
            if (norms > 1.0 + BOUNDARY_TOL).any():
                raise MeasureError("atoms must lie in the closed unit ball")
        elif self.ambient == "torus":
            if (np.abs(np.abs(a) - 1.0) > BOUNDARY_TOL).any():
                raise MeasureError("torus atoms must have unimodular coordinates")
        else:
            raise MeasureError(f"unknown ambient {self.ambient!r}")
        if self.is_probability and abs(w.sum() - 1.0) > 1e-12:
            raise MeasureError("probability measure must have unit mass")

    @property
    def dimension(self):
        return self.atoms.shape[1]

    @property
    def size(self):
        return self.atoms.shape[0]

    def total_mass(self):
        return float(self.weights.sum())

    def normalized(self):
        mass = self.total_mass()
        if mass <= 0:
            raise MeasureError("cannot normalize a zero measure")
        return replace(
            self, weights=self.weights / mass, is_probability=True
        )

    def restricted(self, mask):
        mask = np.asarray(mask, dtype=bool)
        return DiscreteMeasure(
            self.atoms[mask], self.weights[mask], False, self.ambient
        )

    def to_csv(self, path):
        d = self.dimension
        cols = [f"{p}{i}" for i in range(d) for p in ("re", "im")] + ["weight"]
        data = np.column_stack(
            [
                np.column_stack([self.atoms[:, i].real, self.atoms[:, i].imag])
                for i in range(d)
            ]
            + [self.weights]
        )
        with open(path, "w") as fh:
            fh.write("# atoms of a discrete measure; columns: " + ", ".join(cols) + "\n")
            for row in data:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path):
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                rows.append([float(v) for v in line.split(",")])
        data = np.asarray(rows)
        d = (data.shape[1] - 1) // 2
        atoms = data[:, : 2 * d : 2] + 1j * data[:, 1 : 2 * d : 2]
        return cls(atoms, data[:, -1])


def point_masses(points, weights=None, dimension=None):
    arr = as_point_array(points, dimension)
    if weights is None:
        weights = np.full(arr.shape[0], 1.0 / arr.shape[0])
    return DiscreteMeasure(arr, weights, abs(np.sum(weights) - 1.0) <= 1e-12)


SET_KINDS = ("finite-points", "arc", "flat-circle", "tangential-circle", "product-lift")


@dataclass(frozen=True)
class SetDescription:
    """A discretizable compact subset of the sphere.

    kind-specific fields:
      finite-points:      points (m, d)
      arc:                center (boundary direction), interval (t0, t1)
      flat-circle:        center (boundary direction); the orbit e^{it} * center
      tangential-circle:  base (finite unimodular scalars); the lifted circle
                          2^{-1/2} (w, conj(w) * tau) over w in the unit circle
      product-lift:       interval for the base arc E (full circle when the
                          interval spans 2*pi); resolution (m_circle, m_base)
    """

    kind: str
    dimension: int
    resolution: object = 64
    points: np.ndarray | None = None
    center: np.ndarray | None = None
    interval: tuple | None = None
    base: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise MeasureError(f"unknown set kind {self.kind!r}")
        if self.center is not None:
            c = np.asarray(self.center, dtype=complex).reshape(-1)
            if abs(np.linalg.norm(c) - 1.0) > BOUNDARY_TOL:
                raise MeasureError("set center must be a boundary direction")
            object.__setattr__(self, "center", c)
        if self.base is not None:
            b = np.asarray(self.base, dtype=complex).reshape(-1)
            if (np.abs(np.abs(b) - 1.0) > BOUNDARY_TOL).any():
                raise MeasureError("base points must be unimodular")
            object.__setattr__(self, "base", b)
        if self.points is not None:
            object.__setattr__(
                self, "points", as_point_array(self.points, self.dimension)
            )

    def with_resolution(self, m):
        return replace(self, resolution=m)

    def label(self):
        return self.kind

    def discretize(self):
        """Deterministic equispaced sample of the set at the stored resolution."""
        kind = self.kind
        if kind == "finite-points":
            pts = np.asarray(self.points, dtype=complex)
            m = int(self.resolution)
            # prefixes are the nested sub-resolutions of an explicit point list
            return pts[:m] if 0 < m < pts.shape[0] else pts
        if kind == "arc":
            m = int(self.resolution)
            if m < 1:
                raise MeasureError("resolution must be >= 1")
            t0, t1 = self.interval
            if abs((t1 - t0) - 2.0 * np.pi) <= 1e-12:
                ts = t0 + 2.0 * np.pi * np.arange(m) / m  # full span: no seam atom
            elif m == 1:
                ts = np.array([(t0 + t1) / 2.0])
            else:
                ts = np.linspace(t0, t1, m)
            return np.exp(1j * ts)[:, None] * self.center[None, :]
        if kind == "flat-circle":
            m = int(self.resolution)
            ts = 2.0 * np.pi * np.arange(m) / m
            return np.exp(1j * ts)[:, None] * self.center[None, :]
        if kind == "tangential-circle":
            m = int(self.resolution)
            w = np.exp(2j * np.pi * np.arange(m) / m)
            pts = []
            for tau in self.base:
                pts.append(
                    np.column_stack([w, np.conj(w) * tau]) / np.sqrt(2.0)
                )
            return np.vstack(pts)
        if kind == "product-lift":
            m1, m2 = self.resolution
            w = np.exp(2j * np.pi * np.arange(int(m1)) / int(m1))
            taus = _arc_scalars(self.interval, int(m2))
            grid_w = np.repeat(w, taus.size)
            grid_t = np.tile(taus, w.size)
            return np.column_stack([grid_w, np.conj(grid_w) * grid_t]) / np.sqrt(2.0)
        raise MeasureError(f"unsupported set kind {kind!r}")

    def uniform_measure(self):
        return point_masses(self.discretize())


def _arc_scalars(interval, m):
    t0, t1 = interval
    if abs((t1 - t0) - 2.0 * np.pi) <= 1e-12:
        ts = t0 + 2.0 * np.pi * np.arange(m) / m
    elif m == 1:
        ts = np.array([(t0 + t1) / 2.0])
    else:
        ts = np.linspace(t0, t1, m)
    return np.exp(1j * ts)


def finite_points(points, dimension=None):
    arr = as_point_array(points, dimension)
    return SetDescription("finite-points", arr.shape[1], arr.shape[0], points=arr)


def arc(t0, t1, resolution, center=None, dimension=1):
    if center is None:
        center = np.zeros(dimension, dtype=complex)
        center[0] = 1.0
    return SetDescription(
        "arc", len(np.atleast_1d(center)), resolution, center=center, interval=(t0, t1)
    )


def arc_of_length(fraction, resolution, dimension=1):
    """Arc of given normalized length starting at angle 0."""
    return arc(0.0, 2.0 * np.pi * fraction, resolution, dimension=dimension)


def flat_circle(resolution, dimension=2, center=None):
    if center is None:
        center = np.zeros(dimension, dtype=complex)
        center[0] = 1.0
    return SetDescription("flat-circle", len(center), resolution, center=center)


def tangential_circle(resolution, base=(1.0,)):
    return SetDescription(
        "tangential-circle", 2, resolution, base=np.asarray(base, dtype=complex)
    )


def product_lift(t0, t1, resolution):
    return SetDescription("product-lift", 2, tuple(resolution), interval=(t0, t1))


def full_circle_interval():
    return (0.0, 2.0 * np.pi)


def multi_indices(dimension, degree, cap=MOMENT_INDEX_CAP):
    """All multi-indices with |alpha| <= degree, ordered by degree then lex."""
    total = 1
    binom = 1
    for n in range(1, degree + 1):
        binom = binom * (n + dimension - 1) // n
        total += binom
    if total > cap:
        raise MomentBlowupError(
            f"{total} multi-indices exceed the cap {cap}; lower the degree"
        )
    out = np.zeros((total, dimension), dtype=np.int64)
    row = 1
    for n in range(1, degree + 1):
        for combo in combinations_with_replacement(range(dimension), n):
            for i in combo:
                out[row, i] += 1
            row += 1
    return out


@dataclass(frozen=True)
class MomentTable:
    """Moments hat(alpha) = sum_j w_j conj(z_j^alpha), check(alpha) = sum_j w_j z_j^alpha."""

    alphas: np.ndarray
    hat: np.ndarray
    check: np.ndarray

    def degree_slices(self):
        degs = self.alphas.sum(axis=1)
        return degs

    def item(self, alpha):
        alpha = np.asarray(alpha)
        idx = np.where((self.alphas == alpha).all(axis=1))[0]
        if idx.size == 0:
            raise KeyError(f"moment {tuple(alpha)} not tabulated")
        i = int(idx[0])
        return MultiIndexMoment(tuple(alpha), complex(self.hat[i]), complex(self.check[i]))


@dataclass(frozen=True)
class MultiIndexMoment:
    alpha: tuple
    hat_value: complex
    check_value: complex


def monomial_values(atoms, alphas):
    """z_j^alpha for all atoms and tabulated multi-indices, shape (n_alpha, n_atoms)."""
    return np.prod(
        atoms.T[None, :, :] ** alphas[:, :, None], axis=1
    )


def moments(mu, degree, cap=MOMENT_INDEX_CAP):
    alphas = multi_indices(mu.dimension, degree, cap)
    powers = monomial_values(mu.atoms, alphas)
    hat = np.conj(powers) @ mu.weights
    check = powers @ mu.weights
    return MomentTable(alphas, hat, check)


_PUSHFORWARD_TAGS = ("iota_flat", "h_tangential", "r_product")


def pushforward(mu, map_tag):
    """Apply one of the named maps to every atom, keeping weights."""
    if map_tag not in _PUSHFORWARD_TAGS:
        raise MeasureError(f"unknown pushforward map {map_tag!r}")
    a = mu.atoms
    if map_tag == "iota_flat":
        if mu.dimension != 1:
            raise MeasureError("iota_flat lifts disc atoms to the flat circle plane")
        img = np.column_stack([a[:, 0], np.zeros(mu.size, dtype=complex)])
    elif map_tag == "h_tangential":
        if mu.dimension != 2 or mu.ambient != "torus":
            raise MeasureError("h_tangential expects torus atoms (w, tau)")
        img = np.column_stack([a[:, 0], np.conj(a[:, 0]) * a[:, 1]]) / np.sqrt(2.0)
    else:  # r_product
        if mu.dimension != 2:
            raise MeasureError("r_product maps two-ball atoms to the disc")
        img = (2.0 * a[:, 0] * a[:, 1])[:, None]
    norms = np.linalg.norm(img, axis=1)
    if (norms > 1.0 + BOUNDARY_TOL).any():
        raise ImageOffBallError("pushforward image leaves the closed ball")
    return DiscreteMeasure(img, mu.weights.copy(), mu.is_probability, "ball")


def product_measure(mu1, mu2):
    """Product of two disc measures as a torus measure on coordinate pairs."""
    if mu1.dimension != 1 or mu2.dimension != 1:
        raise MeasureError("product_measure expects two disc measures")
    a = np.column_stack(
        [
            np.repeat(mu1.atoms[:, 0], mu2.size),
            np.tile(mu2.atoms[:, 0], mu1.size),
        ]
    )
    w = np.repeat(mu1.weights, mu2.size) * np.tile(mu2.weights, mu1.size)
    return DiscreteMeasure(a, w, mu1.is_probability and mu2.is_probability, "torus")
