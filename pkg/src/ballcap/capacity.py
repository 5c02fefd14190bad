"""Capacities of compact boundary sets via simplex-constrained quadratic
programs on kernel Gramians.

For a finite point set F and radius r the program minimizes lam' G lam over
probability weights, where G is the real kernel Gramian at radius r; the
capacity value is the reciprocal of the minimal energy.  Sweeps over a radius
grid and nested resolutions locate the largest radius the discretization still
resolves (agreement of the two finest resolutions), which is where the
continuum value is read off.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .backend import solve_simplex_qp
from .kernels import apply_variant, as_point_array, base_values, eval_gramian
from .measures import DiscreteMeasure, SetDescription, _arc_scalars

ZERO_CAP_THRESHOLD = 1e-3
AGREEMENT_RTOL = 0.05
DEFAULT_GAP_REL = 1e-9
DEFAULT_GAP_ABS = 1e-8
MAX_ITERATIONS = 200_000


class CapacityError(ValueError):
    pass


class ConditioningError(CapacityError):
    pass


class ConvergenceFailure(CapacityError):
    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class PositiveCapacityError(CapacityError):
    """Unboundedness construction refused: the set was not classified as null."""


class DegenerateSetError(CapacityError):
    pass


def real_gramian(spec, points, r, series_tol=1e-10):
    """Real symmetric Gramian in the variant the quadratic program expects."""
    qp_spec = spec if spec.variant != "holomorphic" else spec.with_variant("real")
    g = eval_gramian(qp_spec, points, r, series_tol)
    g = np.ascontiguousarray(np.real(g))
    return 0.5 * (g + g.T)


@dataclass
class GramianProblem:
    gramian: np.ndarray
    r: float
    points: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gramian, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise CapacityError("gramian must be square")
        scale = max(np.abs(g).max(), 1.0)
        if np.abs(g - g.T).max() > 1e-12 * scale:
            raise CapacityError("gramian must be symmetric to 1e-12")
        if self.points is not None and len(self.points) != g.shape[0]:
            raise CapacityError("point count must match the gramian dimension")
        self.gramian = np.ascontiguousarray(0.5 * (g + g.T))

    @classmethod
    def from_spec(cls, spec, points, r, series_tol=1e-10):
        pts = as_point_array(points, spec.dimension)
        return cls(real_gramian(spec, pts, r, series_tol), r, pts)

    @property
    def size(self):
        return self.gramian.shape[0]

    def psd_defect(self):
        eigs = np.linalg.eigvalsh(self.gramian)
        return float(min(eigs.min(), 0.0))


@dataclass
class EquilibriumResult:
    weights: np.ndarray
    energy: float
    cap_r: float
    fw_gap: float
    variational_residual: float
    r: float
    iterations: int
    converged: bool

    def as_measure(self, points):
        return DiscreteMeasure(points, self.weights, True)

    def summary(self):
        return {
            "r": self.r,
            "energy": self.energy,
            "cap_r": self.cap_r,
            "fw_gap": self.fw_gap,
            "variational_residual": self.variational_residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _face_polish(g, lam, target, max_rounds=48):
    """Active-set refinement: equality-constrained KKT solve on the current
    support, used purely as a direction proposal.  A proposal is accepted only
    when it is simplex-feasible and does not worsen the directly evaluated
    energy, so the returned iterate remains a valid upper bound.
    """
    n = lam.size
    grad = g @ lam
    best = lam
    best_e = float(lam @ grad)
    best_gap = 2.0 * (best_e - grad.min())
    support = lam > max(1e-14, 1e-10 * float(lam.max()))
    if not support.any():
        return best, best_e, best_gap
    for _ in range(max_rounds):
        idx = np.where(support)[0]
        k = idx.size
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = 2.0 * g[np.ix_(idx, idx)]
        kkt[:k, k] = 1.0
        kkt[k, :k] = 1.0
        rhs = np.zeros(k + 1)
        rhs[k] = 1.0
        sol = _refined_solve(kkt, rhs)
        x_s = sol[:k]
        if x_s.min() < -1e-12:
            support[idx[int(np.argmin(x_s))]] = False
            if not support.any():
                break
            continue
        x = np.zeros(n)
        x[idx] = np.maximum(x_s, 0.0)
        total = x.sum()
        if total <= 0.0:
            break
        x /= total
        grad_x = g @ x
        e_x = float(x @ grad_x)
        gap_x = 2.0 * (e_x - grad_x.min())
        if e_x <= best_e and gap_x < best_gap:
            best, best_e, best_gap = x, e_x, gap_x
        if gap_x <= target:
            break
        entering = int(np.argmin(grad_x))
        if support[entering]:
            break  # exact face already active; nothing further to add
        support[entering] = True
    return best, best_e, best_gap


def solve_equilibrium(
    problem,
    tol=DEFAULT_GAP_REL,
    gap_abs=DEFAULT_GAP_ABS,
    max_iter=MAX_ITERATIONS,
    strict=True,
):
    """Minimum-energy probability weights on the problem's point set.

    First-order sweeps (pairwise Frank-Wolfe with an accelerated projected-
    gradient phase) identify the support; an active-set face polish then
    drives the certified Frank-Wolfe gap to the requested target.  The
    variational residual min_i (G lam)_i - lam' G lam is the equilibrium
    inequality certificate, recomputed from fresh matvecs.
    """
    g = problem.gramian
    n = problem.size
    if n == 0:
        raise CapacityError("cannot solve an empty problem")
    scale = max(np.abs(g).max(), 1e-300)
    if np.diag(g).min() < -1e-12 * scale:
        raise ConditioningError("gramian has a significantly negative diagonal")
    budget = int(min(max_iter, 30_000))
    lam, energy, gap, iters, converged = solve_simplex_qp(
        g, float(tol), float(gap_abs), budget
    )
    energy = float(energy)
    gap = float(gap)
    target = min(float(tol) * max(1.0, energy), float(gap_abs))
    if gap > target:
        lam, energy, gap = _face_polish(g, lam, target)
        target = min(float(tol) * max(1.0, energy), float(gap_abs))
        converged = gap <= target
    if energy <= 0.0:
        raise ConditioningError(
            "nonpositive minimal energy; gramian is not usably positive"
        )
    grad = g @ lam
    residual = float(grad.min() - energy)
    result = EquilibriumResult(
        lam,
        float(energy),
        1.0 / float(energy),
        float(gap),
        residual,
        problem.r,
        int(iters),
        bool(converged),
    )
    if strict and not converged:
        raise ConvergenceFailure(
            f"simplex QP did not reach gap target (gap={gap:.3e})", result
        )
    return result


@dataclass
class DualResult:
    coefficients: np.ndarray
    norm_sq: float
    min_re_on_f: float
    dual_value: float
    primal_energy: float
    r: float


def solve_dual(problem, tol=DEFAULT_GAP_REL, gap_abs=DEFAULT_GAP_ABS):
    """Restricted dual program over the span of the kernel functions at the atoms.

    The optimizer is the equilibrium potential rescaled so its real part is 1 at
    the worst atom; its squared norm then matches cap_r up to the gap tolerance.
    """
    eq = solve_equilibrium(problem, tol=tol, gap_abs=gap_abs)
    grad = problem.gramian @ eq.weights
    min_re = float(grad.min())
    if min_re <= 0.0:
        raise ConditioningError("potential is not positive on the set")
    coeffs = eq.weights / min_re
    norm_sq = float(eq.energy / min_re**2)
    return DualResult(coeffs, norm_sq, 1.0, norm_sq, eq.energy, problem.r)


def _product_lift_gramian(spec, set_desc, r, m_circle, m_base):
    """Circle-averaged Gramian for the lifted product set.

    The full lifted discretization is invariant under rotating the circle
    factor, and averaging an optimizer over that rotation orbit preserves both
    feasibility and the objective, so the reduced program over rotation-
    invariant weights attains the same minimum with m_base variables.
    """
    taus = _arc_scalars(set_desc.interval, m_base)
    w = np.exp(2j * np.pi * np.arange(m_circle) / m_circle)
    beta = taus[:, None] * np.conj(taus)[None, :]
    s = (r * r * 0.5) * (w[:, None, None] + np.conj(w)[:, None, None] * beta[None, :, :])
    vals = apply_variant(
        spec if spec.variant != "holomorphic" else spec.with_variant("real"),
        base_values(spec, s),
        s,
    )
    g = np.real(vals).mean(axis=0)
    return 0.5 * (g + g.T), taus


@dataclass
class SweepCell:
    r: float
    resolution: object
    result: EquilibriumResult | None
    error: str | None = None


@dataclass
class CapacityEstimate:
    kernel_label: str
    set_label: str
    r_grid: list
    resolutions: list
    cap: np.ndarray  # (n_res, n_r), nan on failures
    cells: list = field(repr=False, default_factory=list)
    extrapolated_cap: float = float("nan")
    agreement_r: float = float("nan")
    classification: str = "positive"
    decay_fit: dict | None = None
    resolution_trace: list = field(default_factory=list)
    zero_threshold: float = ZERO_CAP_THRESHOLD
    degenerate: bool = False
    notices: list = field(default_factory=list)
    equilibrium: EquilibriumResult | None = None
    equilibrium_points: np.ndarray | None = None
    runtime_seconds: float = 0.0

    def cap_at(self, resolution_index, r_index):
        return float(self.cap[resolution_index, r_index])

    def final_caps(self):
        """cap_r across the grid at the finest resolution."""
        return self.cap[-1]

    def to_dict(self):
        eq = None
        if self.equilibrium is not None:
            eq = self.equilibrium.summary()
            eq["weights"] = [float(v) for v in self.equilibrium.weights]
        return {
            "schema": "ballcap/capacity-estimate/v1",
            "kernel": self.kernel_label,
            "set": self.set_label,
            "r_grid": list(self.r_grid),
            "resolutions": [
                list(m) if isinstance(m, (tuple, list)) else int(m)
                for m in self.resolutions
            ],
            "cap": [[_json_float(v) for v in row] for row in self.cap],
            "extrapolated_cap": _json_float(self.extrapolated_cap),
            "agreement_r": _json_float(self.agreement_r),
            "classification": self.classification,
            "decay_fit": self.decay_fit,
            "resolution_trace": self.resolution_trace,
            "zero_threshold": self.zero_threshold,
            "degenerate": self.degenerate,
            "notices": list(self.notices),
            "equilibrium": eq,
            "runtime_seconds": self.runtime_seconds,
        }


def _json_float(v):
    v = float(v)
    return None if np.isnan(v) else v


def _kernel_label(spec):
    par = "" if spec.parameter is None else f"({spec.parameter:g})"
    return f"{spec.family}{par}/{spec.variant}/d={spec.dimension}"


def capacity_sweep(
    spec,
    set_desc,
    r_schedule,
    resolutions,
    tol=DEFAULT_GAP_REL,
    gap_abs=DEFAULT_GAP_ABS,
    agreement_rtol=AGREEMENT_RTOL,
    zero_threshold=ZERO_CAP_THRESHOLD,
    max_iter=MAX_ITERATIONS,
):
    """Solve the equilibrium program over a (radius, resolution) grid.

    The reported capacity is read at the largest radius where the two finest
    resolutions agree to agreement_rtol; the null classification follows the
    raw final-radius value together with monotone decrease across the last
    grid points.  Solver failures are recorded per cell and skipped.
    """
    t0 = time.monotonic()
    rs = list(r_schedule)
    res_list = list(resolutions)
    is_product = set_desc.kind == "product-lift"
    cap = np.full((len(res_list), len(rs)), np.nan)
    cells = []
    last_eq = None
    last_points = None
    for mi, m in enumerate(res_list):
        if is_product:
            m_circle, m_base = m
            points = set_desc.with_resolution((m_circle, m_base)).discretize()
        else:
            points = set_desc.with_resolution(m).discretize()
        for ri, r in enumerate(rs):
            try:
                if is_product:
                    g, taus = _product_lift_gramian(spec, set_desc, r, m_circle, m_base)
                    problem = GramianProblem(g, r, np.asarray(taus).reshape(-1, 1))
                else:
                    problem = GramianProblem.from_spec(spec, points, r)
                eq = solve_equilibrium(
                    problem, tol=tol, gap_abs=gap_abs, max_iter=max_iter, strict=False
                )
                cap[mi, ri] = eq.cap_r
                cells.append(SweepCell(r, m, eq))
                if mi == len(res_list) - 1:
                    last_eq = eq
                    # reduced product problems carry weights on the base atoms
                    last_points = problem.points
            except CapacityError as exc:  # keep sweeping on per-cell failures
                cells.append(SweepCell(r, m, None, str(exc)))
    estimate = CapacityEstimate(
        _kernel_label(spec),
        set_desc.label(),
        rs,
        res_list,
        cap,
        cells,
        zero_threshold=zero_threshold,
        equilibrium=last_eq,
        equilibrium_points=last_points,
    )
    _finalize_estimate(estimate, agreement_rtol)
    estimate.runtime_seconds = time.monotonic() - t0
    return estimate


def _finalize_estimate(est, agreement_rtol):
    cap = est.cap
    n_res, n_r = cap.shape
    fine = cap[-1]
    est.resolution_trace = [
        {"r": est.r_grid[ri], "caps": [_json_float(cap[mi, ri]) for mi in range(n_res)]}
        for ri in range(n_r)
    ]
    if n_res >= 2:
        coarse = cap[-2]
        agree_idx = -1
        for ri in range(n_r):
            a, b = coarse[ri], fine[ri]
            if np.isnan(a) or np.isnan(b) or b <= 0:
                continue
            if abs(a - b) <= agreement_rtol * abs(b):
                agree_idx = ri
        if agree_idx >= 0:
            est.agreement_r = est.r_grid[agree_idx]
            est.extrapolated_cap = float(fine[agree_idx])
        else:
            est.notices.append("no resolution agreement anywhere on the grid")
            est.extrapolated_cap = float(fine[~np.isnan(fine)][-1])
    else:
        valid = fine[~np.isnan(fine)]
        est.extrapolated_cap = float(valid[-1]) if valid.size else float("nan")
        est.agreement_r = est.r_grid[-1]
    # null classification: tiny final value and monotone decrease at the tail
    valid = ~np.isnan(fine)
    tail = fine[valid][-5:]
    monotone_tail = len(tail) >= 2 and all(
        tail[i + 1] <= tail[i] + 1e-10 for i in range(len(tail) - 1)
    )
    final_val = fine[valid][-1] if valid.any() else np.nan
    if est.degenerate:
        est.classification = "zero"
    elif np.isnan(final_val):
        est.classification = "positive"
        est.notices.append("final grid point failed; classification defaulted")
    elif final_val < est.zero_threshold and monotone_tail:
        est.classification = "zero"
        rs = np.asarray(est.r_grid)[valid][-8:]
        vals = fine[valid][-8:]
        if (vals > 0).all():
            a = np.vstack([np.log(1.0 - rs), np.ones(rs.size)]).T
            coef, *_ = np.linalg.lstsq(a, np.log(vals), rcond=None)
            est.decay_fit = {
                "model": "cap ~ c*(1-r)^p",
                "p": float(coef[0]),
                "log_c": float(coef[1]),
            }
    else:
        est.classification = "positive"


def monotonicity_report(est, slack=1e-10):
    """Check cap_r is nonincreasing in r and nondecreasing under nested refinement.

    Nesting of two resolutions is established geometrically (every coarse atom
    appears among the fine atoms); non-nested pairs are skipped.
    """
    violations = []
    cap = est.cap
    n_res, n_r = cap.shape
    for mi in range(n_res):
        row = cap[mi]
        for ri in range(1, n_r):
            a, b = row[ri - 1], row[ri]
            if not (np.isnan(a) or np.isnan(b)) and b > a + slack:
                violations.append(
                    f"cap_r increased in r at resolution index {mi}: "
                    f"r={est.r_grid[ri]:.8f} ({a:.6e} -> {b:.6e})"
                )
    return violations


def nested_resolution_check(spec, set_desc, r, m_coarse, m_fine, **solve_kwargs):
    """cap_r(F_coarse) <= cap_r(F_fine) + slack when F_coarse is a subset."""
    pc = set_desc.with_resolution(m_coarse).discretize()
    pf = set_desc.with_resolution(m_fine).discretize()
    d2 = np.abs(pc[:, None, :] - pf[None, :, :]).max(axis=2).min(axis=1)
    if d2.max() > 1e-9:
        raise CapacityError("resolutions are not geometrically nested")
    eq_c = solve_equilibrium(GramianProblem.from_spec(spec, pc, r), **solve_kwargs)
    eq_f = solve_equilibrium(GramianProblem.from_spec(spec, pf, r), **solve_kwargs)
    return eq_c.cap_r, eq_f.cap_r


@dataclass
class UnboundednessConstruction:
    """Partial sums of normalized equilibrium potentials at increasing radii.

    Each stage contributes the equilibrium potential at its radius rescaled by
    the stage capacity, so its real part is at least 1 on the sampled set while
    its norm is at most the square root of the stage capacity.
    """

    spec: object
    points: np.ndarray
    radii: list
    caps: list
    weight_stages: list

    def stages(self):
        return len(self.radii)

    def evaluate(self, z, upto=None):
        from .kernels import kernel_matrix

        n = self.stages() if upto is None else int(upto)
        z_arr = as_point_array([z] if np.ndim(z) <= 1 else z, self.spec.dimension)
        total = np.zeros(z_arr.shape[0], dtype=complex)
        for i in range(n):
            row = kernel_matrix(self.spec, z_arr, self.points, rz=self.radii[i])
            total += self.caps[i] * (row @ self.weight_stages[i])
        return total if total.size > 1 else complex(total[0])

    def min_re_on_set(self, upto=None):
        vals = np.zeros(self.points.shape[0], dtype=complex)
        from .kernels import kernel_matrix

        n = self.stages() if upto is None else int(upto)
        for i in range(n):
            m = kernel_matrix(self.spec, self.points, self.points, rz=self.radii[i])
            vals += self.caps[i] * (m @ self.weight_stages[i])
        return float(np.real(vals).min())

    def norm_sq_exact(self, upto=None):
        """Exact squared norm of the partial sum via the reproducing pairing.

        Pairing two kernel sections dilated by r_i and r_j lands at the product
        radius r_i * r_j on both arguments.
        """
        from .kernels import kernel_matrix

        n = self.stages() if upto is None else int(upto)
        total = 0.0
        for i in range(n):
            for j in range(n):
                m = np.real(
                    kernel_matrix(
                        self.spec,
                        self.points,
                        self.points,
                        rz=self.radii[i] * self.radii[j],
                    )
                )
                total += (
                    self.caps[i]
                    * self.caps[j]
                    * float(self.weight_stages[i] @ m @ self.weight_stages[j])
                )
        return total

    def norm_budget(self, upto=None):
        n = self.stages() if upto is None else int(upto)
        return float(sum(np.sqrt(c) for c in self.caps[:n]))


def build_unboundedness_function(
    spec,
    set_desc,
    radii,
    classification_sweep=None,
    tol=DEFAULT_GAP_REL,
    gap_abs=DEFAULT_GAP_ABS,
    ratio_cap=0.95,
):
    """Construct the stagewise potential sum witnessing boundary blow-up.

    Requires a prior null classification (supply one or it is computed on the
    given radii); refuses on positive classification.  The computed stage
    capacities must look summable after square roots (ratio test).
    """
    if classification_sweep is None:
        classification_sweep = capacity_sweep(
            spec, set_desc, radii, [set_desc.resolution], tol=tol, gap_abs=gap_abs
        )
    if classification_sweep.classification != "zero":
        raise PositiveCapacityError(
            "refusing the construction: the set was classified as positive capacity"
        )
    points = set_desc.discretize()
    caps = []
    weights = []
    for r in radii:
        eq = solve_equilibrium(
            GramianProblem.from_spec(spec, points, r), tol=tol, gap_abs=gap_abs
        )
        caps.append(eq.cap_r)
        weights.append(eq.weights)
    roots = np.sqrt(np.asarray(caps))
    ratios = roots[1:] / roots[:-1]
    if ratios.size and np.median(ratios) > ratio_cap:
        raise CapacityError(
            f"stage capacities do not look summable (median sqrt-ratio "
            f"{np.median(ratios):.3f} > {ratio_cap})"
        )
    return UnboundednessConstruction(spec, points, list(radii), caps, weights)


def _poly_gradient(exponents, coefficients, z):
    d = z.shape[0]
    grad = np.zeros(d, dtype=complex)
    for c, e in zip(coefficients, exponents):
        for k in range(d):
            if e[k] == 0:
                continue
            term = c * e[k]
            for j in range(d):
                p = e[j] - 1 if j == k else e[j]
                if p:
                    term = term * z[j] ** p
            grad[k] += term
    return grad


def polynomial_zero_set_capacity(
    spec,
    polynomial,
    resolution,
    r_schedule,
    n_samples=120_000,
    seed=7,
    polish_tol=1e-9,
    **sweep_kwargs,
):
    """Capacity estimate of a polynomial's boundary zero set.

    The sphere is sampled quasi-uniformly, small-|p| candidates are polished
    onto {p = 0, |z| = 1} by Gauss-Newton least squares, deduplicated, and the
    surviving points feed a standard finite-set sweep.  An empty zero set
    yields a degenerate estimate flagged with capacity zero by convention.
    """
    from .measures import finite_points

    rng = np.random.default_rng(seed)
    d = spec.dimension
    raw = rng.normal(size=(n_samples, d)) + 1j * rng.normal(size=(n_samples, d))
    sphere = raw / np.linalg.norm(raw, axis=1)[:, None]
    vals = np.abs(polynomial.eval(sphere))
    keep = min(4000, n_samples)
    candidates = sphere[np.argsort(vals)[:keep]]
    polished = []
    exps, coefs = polynomial.exponents, polynomial.coefficients
    for z in candidates:
        z = z.copy()
        ok = False
        for _ in range(60):
            pv = complex(polynomial.eval(z[None, :])[0])
            nv = float(np.linalg.norm(z))
            res = np.array([pv.real, pv.imag, nv * nv - 1.0])
            if abs(pv) <= polish_tol and abs(nv - 1.0) <= 1e-12:
                ok = True
                break
            grad = _poly_gradient(exps, coefs, z)
            jac = np.zeros((3, 2 * d))
            jac[0, 0::2] = grad.real
            jac[0, 1::2] = -grad.imag
            jac[1, 0::2] = grad.imag
            jac[1, 1::2] = grad.real
            jac[2, 0::2] = 2.0 * z.real
            jac[2, 1::2] = 2.0 * z.imag
            step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
            z = z + (step[0::2] + 1j * step[1::2])
            if np.linalg.norm(step) < 1e-15:
                break
        if ok:
            polished.append(z / np.linalg.norm(z))
    if not polished:
        est = CapacityEstimate(
            _kernel_label(spec),
            f"zero-set[{polynomial.coefficients.size} terms]",
            list(r_schedule),
            [0],
            np.zeros((1, len(list(r_schedule)))),
            degenerate=True,
        )
        est.extrapolated_cap = 0.0
        est.classification = "zero"
        est.notices.append("degenerate zero set: no boundary zeros found")
        return est
    pts = np.asarray(polished)
    # separation sized for a one-real-dimensional locus at the target resolution;
    # greedy selection then spreads the atoms over the whole zero set
    sep = np.pi / max(int(resolution), 1)
    chosen = [pts[0]]
    for z in pts[1:]:
        if min(np.linalg.norm(z - c) for c in chosen) > sep:
            chosen.append(z)
        if len(chosen) >= 3 * int(resolution):
            break
    ordered = _farthest_point_order(np.asarray(chosen))
    zero_set = finite_points(ordered, d)
    n_pts = ordered.shape[0]
    resolutions = [max(2, n_pts // 2), n_pts] if n_pts >= 4 else [n_pts]
    est = capacity_sweep(spec, zero_set, r_schedule, resolutions, **sweep_kwargs)
    est.notices.append(f"zero set sampled with {n_pts} polished points")
    return est


def _farthest_point_order(pts):
    """Max-min greedy ordering: every prefix is a good covering of the set."""
    n = pts.shape[0]
    order = [0]
    dists = np.linalg.norm(pts - pts[0], axis=1)
    for _ in range(n - 1):
        nxt = int(np.argmax(dists))
        order.append(nxt)
        dists = np.minimum(dists, np.linalg.norm(pts - pts[nxt], axis=1))
    return pts[order]
