"""Kernel energies of discrete measures: dilated double sums, the moment-series
route, radial limits with divergence classification, and potentials.
"""

from dataclasses import dataclass
from math import lgamma

import numpy as np

from .kernels import KernelError, kernel_matrix
from .measures import moments, monomial_values, multi_indices


class UndefinedCoefficientError(KernelError):
    """Monomial outside the space: its coefficient weight a_{|alpha|} vanishes."""


def dyadic_radii(depth, start=1):
    """The schedule r_k = 1 - 2^{-k}, k = start..depth."""
    return [1.0 - 2.0 ** (-k) for k in range(start, depth + 1)]


def energy_r(spec, mu, nu=None, r=0.0, series_tol=1e-10):
    """Mixed dilated energy sum_{ij} k(r a_i, r b_j) w_i v_j.

    Real variants give a real number; the holomorphic variant returns a float
    when the imaginary part is at rounding level and a complex value otherwise.
    """
    if nu is None:
        nu = mu
    m = kernel_matrix(spec, nu.atoms, mu.atoms, rz=r, series_tol=series_tol)
    val = nu.weights @ m @ mu.weights
    val = complex(val)
    scale = max(1.0, abs(val))
    if abs(val.imag) <= 1e-10 * scale:
        return float(val.real)
    return val


def _multinomial_weights(alphas):
    degs = alphas.sum(axis=1)
    out = np.exp(
        np.vectorize(lgamma)(degs + 1.0)
        - np.vectorize(lgamma)(alphas + 1.0).sum(axis=1)
    )
    return out, degs


def energy_series(spec, mu, r, degree, cap=None):
    """Truncated moment-series energy including both conjugation branches.

    Real-weighted measures make the real variant agree with the holomorphic
    one; the pluriharmonic variant symmetrizes the nonnegative-index
    coefficients.  The modulus variant has no moment formula.
    """
    if spec.variant == "modulus":
        raise KernelError("the modulus variant admits no moment-series energy")
    kwargs = {} if cap is None else {"cap": cap}
    table = moments(mu, degree, **kwargs)
    mult, degs = _multinomial_weights(table.alphas)
    pos = spec.coefficients.positive
    neg = spec.coefficients.negative
    if spec.variant == "pluriharmonic":
        neg = pos[1:]
    a_pos = np.where(degs < pos.size, pos[np.minimum(degs, pos.size - 1)], 0.0)
    radial = r ** (2.0 * degs)
    total = float(np.sum(a_pos * radial * mult * np.abs(table.hat) ** 2))
    if neg.size:
        a_neg = np.zeros(degs.shape)
        inside = (degs >= 1) & (degs <= neg.size)
        a_neg[inside] = neg[degs[inside] - 1]
        total += float(np.sum(a_neg * radial * mult * np.abs(table.check) ** 2))
    return total


def required_series_degree(spec, mu, r, tol=1e-9):
    """Smallest truncation degree whose geometric tail falls below tol."""
    rho = float(r * r * max(np.linalg.norm(mu.atoms, axis=1).max() ** 2, 1e-12))
    if rho >= 1.0:
        raise KernelError("series degree bound needs r^2 * max|z|^2 < 1")
    amax = spec.coefficients.coefficient_bound
    mass = mu.total_mass() ** 2
    need = np.log(tol * (1.0 - rho) / (2.0 * amax * max(mass, 1e-12))) / np.log(
        max(rho, 1e-12)
    )
    return int(max(4, np.ceil(need)))


GROWTH_MODELS = ("log", "pole", "power")


def _r2(y, yhat):
    ss_res = float(np.sum((y - yhat) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 0:
        return 1.0
    return 1.0 - ss_res / ss_tot


def fit_growth(rs, es):
    """Least-squares growth-law fits of E_r against 1-r; returns the best model.

    Candidates: c0 + c1*log(1/(1-r)), c0 + c1/(1-r), and the log-log power law
    E ~ c*(1-r)^(-a).
    """
    rs = np.asarray(rs, dtype=float)
    es = np.asarray(es, dtype=float)
    x = 1.0 - rs
    fits = {}
    for model in GROWTH_MODELS:
        if model == "log":
            design = np.log(1.0 / x)
            a = np.vstack([design, np.ones_like(design)]).T
            coef, *_ = np.linalg.lstsq(a, es, rcond=None)
            fits[model] = {
                "params": [float(coef[0]), float(coef[1])],
                "r2": _r2(es, a @ coef),
            }
        elif model == "pole":
            design = 1.0 / x
            a = np.vstack([design, np.ones_like(design)]).T
            coef, *_ = np.linalg.lstsq(a, es, rcond=None)
            fits[model] = {
                "params": [float(coef[0]), float(coef[1])],
                "r2": _r2(es, a @ coef),
            }
        else:
            if (es <= 0).any():
                continue
            a = np.vstack([np.log(1.0 / x), np.ones_like(x)]).T
            coef, *_ = np.linalg.lstsq(a, np.log(es), rcond=None)
            fits[model] = {
                "params": [float(coef[0]), float(coef[1])],
                "r2": _r2(np.log(es), a @ coef),
            }
    best = max(fits, key=lambda k: fits[k]["r2"])
    return {"model": best, **fits[best], "all": fits}


@dataclass
class EnergyReport:
    r_grid: list
    e_r_values: list
    series_values: list | None
    limit_estimate: float | None  # None encodes divergence
    classification: str  # "converged" | "diverging"
    growth_fit: dict | None
    increments: list

    def rows(self):
        out = []
        for i, r in enumerate(self.r_grid):
            sv = self.series_values[i] if self.series_values else float("nan")
            out.append((r, self.e_r_values[i], sv, self.increments[i]))
        return out

    def to_dict(self):
        return {
            "schema": "ballcap/energy-report/v1",
            "r_grid": list(self.r_grid),
            "e_r": list(self.e_r_values),
            "series_e_r": None
            if self.series_values is None
            else list(self.series_values),
            "limit_estimate": self.limit_estimate,
            "classification": self.classification,
            "growth_fit": None
            if self.growth_fit is None
            else {k: v for k, v in self.growth_fit.items() if k != "all"},
            "increments": list(self.increments),
        }


def energy_limit(
    spec,
    mu,
    r_schedule=None,
    depth=14,
    rel_tol=1e-6,
    with_series=False,
    series_degree=None,
):
    """Sweep E_r over an increasing radius schedule and classify the limit.

    Convergence is declared when three consecutive relative increments stay
    below rel_tol; otherwise a growth law is fitted in 1-r.
    """
    rs = list(r_schedule) if r_schedule is not None else dyadic_radii(depth)
    es = [energy_r(spec, mu, r=r) for r in rs]
    es = [float(np.real(e)) for e in es]
    series = None
    if with_series:
        series = []
        for r in rs:
            deg = series_degree or required_series_degree(spec, mu, r)
            series.append(energy_series(spec, mu, r, deg))
    increments = [0.0] + [es[i] - es[i - 1] for i in range(1, len(es))]
    rel = [
        inc / max(abs(e), 1e-300) for inc, e in zip(increments, es)
    ]
    converged = False
    if len(es) >= 4:
        tail = rel[-3:]
        converged = all(abs(t) < rel_tol for t in tail)
    if converged:
        return EnergyReport(rs, es, series, es[-1], "converged", None, increments)
    fit = fit_growth(rs[max(0, len(rs) // 2) :], es[max(0, len(es) // 2) :])
    return EnergyReport(rs, es, series, None, "diverging", fit, increments)


def potential(spec, mu, r, z, series_tol=1e-10):
    """Dilated potential value sum_j k(r z, r a_j) w_j."""
    row = kernel_matrix(spec, [z], mu.atoms, rz=r, series_tol=series_tol)[0]
    val = complex(row @ mu.weights)
    if spec.is_real_valued:
        return val.real
    return val


def potential_norm_sq(spec, mu, r, exact=False):
    """Squared Hilbert norm of the dilated potential of mu.

    The default reports the energy bound E_r(mu) (always an upper bound); with
    exact=True the reproducing pairing is evaluated, which lands at radius r^2.
    """
    if exact:
        return float(np.real(energy_r(spec, mu, r=r * r)))
    return float(np.real(energy_r(spec, mu, r=r)))


def monomial_norm_sq(spec, alpha):
    """Squared norm of z^alpha: (alpha! / |alpha|!) / a_{|alpha|}."""
    alpha = np.asarray(alpha, dtype=np.int64)
    n = int(alpha.sum())
    pos = spec.coefficients.positive
    a_n = pos[n] if n < pos.size else 0.0
    if a_n <= 0.0:
        raise UndefinedCoefficientError(
            f"monomial of degree {n} lies outside the space (coefficient is zero)"
        )
    log_mult = lgamma(n + 1.0) - sum(lgamma(int(ai) + 1.0) for ai in alpha)
    return float(np.exp(-log_mult) / a_n)


@dataclass(frozen=True)
class MonomialPolynomial:
    """A polynomial given by monomial exponents (t, d) and complex coefficients."""

    exponents: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "exponents", np.atleast_2d(np.asarray(self.exponents, dtype=np.int64))
        )
        object.__setattr__(
            self, "coefficients", np.asarray(self.coefficients, dtype=complex).reshape(-1)
        )

    @property
    def dimension(self):
        return self.exponents.shape[1]

    def eval(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        vals = monomial_values(pts, self.exponents)
        return self.coefficients @ vals

    def dilated_eval(self, points, r):
        degs = self.exponents.sum(axis=1)
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        vals = monomial_values(pts, self.exponents)
        return (self.coefficients * r ** degs.astype(float)) @ vals

    def norm_sq(self, spec):
        return float(
            sum(
                abs(c) ** 2 * monomial_norm_sq(spec, e)
                for c, e in zip(self.coefficients, self.exponents)
                if c != 0
            )
        )


def functional_identity_check(spec, mu, r, polynomials, degree=None):
    """Residual between integrating dilated polynomials against conj(mu) and the
    reproducing pairing with the potential, computed in coefficient space.

    Returns the maximum absolute residual over the supplied polynomials.
    """
    worst = 0.0
    for poly in polynomials:
        # real-weighted mu: integration against conj(mu) is the plain atom sum
        lhs = complex(poly.dilated_eval(mu.atoms, r) @ mu.weights)
        # coefficient-space route: <g, f_mu> = sum ghat(alpha) r^|alpha| conj(hat mu(alpha))
        deg = degree if degree is not None else int(poly.exponents.sum(axis=1).max())
        table = moments(mu, deg)
        rhs = 0.0 + 0.0j
        for c, e in zip(poly.coefficients, poly.exponents):
            if c == 0:
                continue
            monomial_norm_sq(spec, e)  # raises when the monomial leaves the space
            idx = np.where((table.alphas == e).all(axis=1))[0]
            hat = complex(table.hat[int(idx[0])])
            rhs += c * (r ** float(e.sum())) * np.conj(hat)
        worst = max(worst, abs(lhs - rhs))
    return worst


def l1_energy_bound_residual(spec, mu, poly):
    """Slack in the integral bound ||f||_L1(mu) <= sqrt(E(mu)) ||f||.

    Positive return values certify the inequality with the returned margin.
    mu must have finite limit energy (interior atoms for non-summable kernels).
    """
    lhs = float(np.abs(poly.eval(mu.atoms)) @ mu.weights)
    # interior atoms keep |<z, w>| < 1, so the limit energy is a plain evaluation
    e_lim = float(np.real(energy_r(spec, mu, r=1.0)))
    rhs = np.sqrt(e_lim) * np.sqrt(poly.norm_sq(spec))
    return rhs - lhs


def multi_index_basis(dimension, degree):
    return multi_indices(dimension, degree)
