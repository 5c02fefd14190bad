"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Heavy fixtures are session-scoped and shared; every equilibrium solve feeding a
criterion is also registered so the certificate criterion can audit all of them.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from ballcap import kernels, measures
from ballcap.capacity import (
    GramianProblem,
    build_unboundedness_function,
    capacity_sweep,
    monotonicity_report,
    nested_resolution_check,
    solve_dual,
    solve_equilibrium,
)
from ballcap.energy import dyadic_radii, energy_r, energy_series, required_series_degree
from ballcap.maximal import (
    SampleScheme,
    equilibrium_potential_function,
    maximal_sample,
    normalized_kernel_function,
    weak_type_experiment,
)
from ballcap.measures import point_masses
from ballcap.scenarios import scenario_abstract_axioms
from ballcap.tolerances import TOLERANCES

from conftest import random_sphere_points

SOLVER = {
    "tol": TOLERANCES["solver_gap_rel"],
    "gap_abs": TOLERANCES["solver_gap_abs"],
}

E1 = np.array([1.0 + 0j, 0.0])


def _criterion(name, ok, detail=""):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def solved_registry():
    """Every equilibrium result produced while running the acceptance suite."""
    return []


@pytest.fixture(scope="session")
def hardy_sweeps(solved_registry):
    spec = kernels.hardy_poisson(1)
    out = {}
    for frac in (0.125, 0.25, 0.5):
        est = capacity_sweep(
            spec,
            measures.arc_of_length(frac, 512),
            dyadic_radii(14),
            [128, 256, 512],
            agreement_rtol=TOLERANCES["richardson_agreement"],
            **SOLVER,
        )
        out[frac] = est
        solved_registry.extend(
            cell.result for cell in est.cells if cell.result is not None
        )
    return out


@pytest.fixture(scope="session")
def tangential_sweep(solved_registry):
    spec = kernels.drury_arveson(2, "real")
    est = capacity_sweep(
        spec,
        measures.tangential_circle(512),
        dyadic_radii(21),
        [128, 256, 512],
        **SOLVER,
    )
    solved_registry.extend(
        cell.result for cell in est.cells if cell.result is not None
    )
    return est


@pytest.fixture(scope="session")
def pushforward_sweeps(solved_registry):
    da = kernels.drury_arveson(2, "real")
    d_half = kernels.weighted_dirichlet(0.5, 1, "real")
    rs = dyadic_radii(10)
    out = {}
    for frac in (0.125, 0.25, 0.5):
        t1 = 2.0 * np.pi * frac
        base = capacity_sweep(
            d_half,
            measures.arc(0.0, t1, 64),
            rs,
            [32, 64],
            agreement_rtol=TOLERANCES["pushforward_agreement"],
            **SOLVER,
        )
        lift = capacity_sweep(
            da,
            measures.product_lift(0.0, t1, (2048, 64)),
            rs,
            [(2048, 32), (2048, 64)],
            agreement_rtol=TOLERANCES["pushforward_agreement"],
            **SOLVER,
        )
        out[frac] = (base, lift, rs)
        for est in (base, lift):
            solved_registry.extend(
                cell.result for cell in est.cells if cell.result is not None
            )
    return out


def test_hardy_arc_capacity(hardy_sweeps):
    details = []
    ok = True
    for frac, est in hardy_sweeps.items():
        rel = abs(est.extrapolated_cap - frac) / frac
        details.append(
            f"L={frac}: cap={est.extrapolated_cap:.5f} rel={rel:.4f} "
            f"t={est.runtime_seconds:.1f}s"
        )
        ok = ok and rel <= TOLERANCES["hardy_arc_rel"]
        ok = ok and est.runtime_seconds <= 60.0
    _criterion("hardy-arc-capacity", ok, "; ".join(details))


def test_flat_circle_energies():
    rs = dyadic_radii(8)
    re_spec = kernels.drury_arveson(2, "real")
    fine = measures.flat_circle(2048).uniform_measure()
    coarse = measures.flat_circle(1024).uniform_measure()
    e_fine = [energy_r(re_spec, fine, r=r) for r in rs]
    e_coarse = [energy_r(re_spec, coarse, r=r) for r in rs]
    agree = [
        i
        for i in range(len(rs))
        if abs(e_fine[i] - e_coarse[i]) <= 1e-7 * abs(e_fine[i])
    ]
    e_star = e_fine[agree[-1]]
    ok = abs(e_star - 1.0) <= TOLERANCES["flat_energy_accept_abs"]
    abs_spec = kernels.drury_arveson(2, "modulus")
    worst = 0.0
    es = []
    for r in rs:
        e = energy_r(abs_spec, fine, r=r)
        oracle, _ = quad(
            lambda t: 1.0 / (2 * np.pi * abs(1 - r * r * np.exp(1j * t))),
            0,
            2 * np.pi,
            limit=400,
        )
        worst = max(worst, abs(e - oracle) / oracle)
        es.append(e)
    ok = ok and worst <= TOLERANCES["flat_abs_integral_rel"]
    xs = np.log(1.0 / (1.0 - np.asarray(rs) ** 2))
    design = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(design, np.asarray(es), rcond=None)
    resid = np.asarray(es) - design @ coef
    r2 = 1.0 - float(resid @ resid) / float(np.sum((es - np.mean(es)) ** 2))
    ok = ok and r2 >= TOLERANCES["flat_log_fit_r2"]
    _criterion(
        "flat-circle-energies",
        ok,
        f"ReK energy={e_star:.8f}, |K| worst rel={worst:.2e}, log-fit R2={r2:.4f}",
    )


def test_tangential_circle_zero(tangential_sweep):
    est = tangential_sweep
    finals = est.final_caps()
    tail = finals[-5:]
    monotone = all(
        tail[i + 1] <= tail[i] + TOLERANCES["cap_monotone_slack"]
        for i in range(len(tail) - 1)
    )
    ok = (
        est.classification == "zero"
        and finals[-1] < TOLERANCES["zero_cap_threshold"]
        and monotone
    )
    _criterion(
        "tangential-circle-zero",
        ok,
        f"final cap={finals[-1]:.2e}, monotone tail={monotone}",
    )


def test_pushforward_identity(pushforward_sweeps):
    ok = True
    details = []
    for frac, (base, lift, rs) in pushforward_sweeps.items():
        r_hat = min(base.agreement_r, lift.agreement_r)
        ri = rs.index(r_hat)
        cb, cl = base.cap_at(-1, ri), lift.cap_at(-1, ri)
        rel = abs(cl - cb) / cb
        details.append(f"L={frac}: base={cb:.5f} lift={cl:.5f} rel={rel:.4f}")
        ok = ok and rel <= TOLERANCES["pushforward_rel"]
    _criterion("pushforward-identity", ok, "; ".join(details))


def test_single_atom_closed_form(solved_registry):
    spec = kernels.hardy_poisson(2)
    worst = 0.0
    for r in (0.5, 0.9, 0.99):
        eq = solve_equilibrium(
            GramianProblem.from_spec(spec, E1.reshape(1, 2), r), **SOLVER
        )
        solved_registry.append(eq)
        worst = max(worst, abs(eq.cap_r - (1 - r * r) / (1 + r * r)))
    ok = worst <= TOLERANCES["single_atom_abs"]
    _criterion("single-atom-closed-form", ok, f"worst abs err={worst:.2e}")


def _acceptance_kernels():
    return [
        kernels.drury_arveson(2, "real"),
        kernels.dirichlet_log(2, "real"),
        kernels.weighted_dirichlet(0.5, 2, "real"),
        kernels.hardy_poisson(2),
        kernels.bounded(0.5, 2, "real"),
    ]


def test_qp_duality(solved_registry):
    rng = np.random.default_rng(2718)
    worst = 0.0
    for spec in _acceptance_kernels():
        for _ in range(20):
            pts = random_sphere_points(rng, int(rng.integers(4, 28)), 2)
            r = float(rng.uniform(0.3, 0.9))
            problem = GramianProblem.from_spec(spec, pts, r)
            dual = solve_dual(problem, **SOLVER)
            eq = solve_equilibrium(problem, **SOLVER)
            solved_registry.append(eq)
            worst = max(worst, abs(dual.dual_value * dual.primal_energy - 1.0))
    ok = worst <= TOLERANCES["duality_rel"]
    _criterion("qp-duality", ok, f"worst |dual*primal-1|={worst:.2e} over 100 sets")


def test_abstract_axioms():
    report = scenario_abstract_axioms(instances=100)
    failing = [c.name for c in report.checks if not c.passed]
    _criterion(
        "abstract-axioms",
        report.passed,
        f"{len(report.checks)} checks over 100 instances/kernel"
        + (f"; failing: {failing}" if failing else ""),
    )


def test_energy_series_cross_validation():
    rng = np.random.default_rng(31415)
    families = [
        kernels.drury_arveson,
        kernels.dirichlet_log,
        lambda d: kernels.weighted_dirichlet(0.5, d),
        kernels.hardy_poisson,
        lambda d: kernels.bounded(0.5, d),
    ]
    worst = 0.0
    for i in range(200):
        d = int(rng.integers(1, 4))
        spec = families[i % len(families)](d)
        n = int(rng.integers(2, 7))
        pts = random_sphere_points(rng, n, d)
        radii = rng.uniform(0.3, 1.0, n)[:, None]
        mu = point_masses(pts * radii, rng.uniform(0.1, 1.0, n))
        r = float(rng.uniform(0.2, 0.75))
        degree = required_series_degree(spec, mu, r, tol=1e-10)
        direct = float(np.real(energy_r(spec, mu, r=r)))
        series = energy_series(spec, mu, r, degree)
        worst = max(worst, abs(direct - series) / max(1.0, abs(direct)))
    ok = worst <= TOLERANCES["series_cross_rel"]
    _criterion(
        "energy-series-cross-validation", ok, f"worst rel={worst:.2e} over 200 measures"
    )


def _weak_type_functions(spec):
    funcs = []
    grids = []
    for k in range(1, 11):
        f = normalized_kernel_function(spec, (1.0 - 2.0**-k) * E1, f"kernel-r{k}")
        peak = float(np.abs(f.eval(E1.reshape(1, 2)))[0])
        funcs.append(f)
        grids.append(list(np.geomspace(1.0, max(2.0, 0.8 * peak), 5)))
    for frac in (0.125, 0.25, 0.5):
        center = E1
        desc = measures.arc(0.0, 2 * np.pi * frac, 48, center=center)
        f = equilibrium_potential_function(
            spec, desc, 1.0 - 2.0**-6, f"potential-arc-{frac}", **SOLVER
        )
        peak = float(np.abs(f.eval((1 - 2.0**-8) * E1.reshape(1, 2)))[0])
        funcs.append(f)
        grids.append(list(np.geomspace(0.5, max(1.5, 0.8 * peak), 5)))
    return funcs, grids


def test_weak_type_experiment():
    spec = kernels.hardy_poisson(2)
    funcs, grids = _weak_type_functions(spec)
    scheme = SampleScheme(n_radial=48, n_theta=24, n_tangential=6)
    coarse = weak_type_experiment(
        spec, funcs, [2.0, 4.0], grids, grid_size=512, scheme=scheme, **{
            "solver_tol": SOLVER["tol"], "solver_gap_abs": SOLVER["gap_abs"],
        }
    )
    fine = weak_type_experiment(
        spec, funcs, [2.0, 4.0], grids, grid_size=2048, scheme=scheme, **{
            "solver_tol": SOLVER["tol"], "solver_gap_abs": SOLVER["gap_abs"],
        }
    )
    all_finite = all(np.isfinite(row.ratio) for row in coarse.rows + fine.rows)
    growth = fine.max_ratio() / max(coarse.max_ratio(), 1e-300)
    ok = all_finite and growth <= TOLERANCES["weak_type_growth_factor"]
    _criterion(
        "weak-type-ratios",
        ok,
        f"constant={coarse.max_ratio():.4f} (grid 512), refined={fine.max_ratio():.4f} "
        f"(grid 2048), growth={growth:.2f}x",
    )


def test_unboundedness_construction(solved_registry):
    spec = kernels.hardy_poisson(2)
    single = measures.finite_points(E1.reshape(1, 2))
    radii = [1.0 - 4.0 ** (-n) for n in range(1, 11)]
    sweep = capacity_sweep(spec, single, dyadic_radii(24), [1], **SOLVER)
    solved_registry.extend(c.result for c in sweep.cells if c.result is not None)
    constr = build_unboundedness_function(
        spec, single, radii, classification_sweep=sweep, **SOLVER
    )
    min_re = constr.min_re_on_set(10)
    norm = float(np.sqrt(constr.norm_sq_exact(10)))
    budget = constr.norm_budget(10)
    ok = min_re >= 9.99 and norm <= budget + TOLERANCES["unbounded_norm_slack"]
    _criterion(
        "unboundedness-construction",
        ok,
        f"Re F_10 on set={min_re:.6f} (>=9.99), norm={norm:.6f} <= budget={budget:.6f}",
    )


def test_monotonicity_battery(hardy_sweeps, tangential_sweep, pushforward_sweeps):
    violations = []
    for frac, est in hardy_sweeps.items():
        violations += monotonicity_report(est, TOLERANCES["cap_monotone_slack"])
    violations += monotonicity_report(tangential_sweep, TOLERANCES["cap_monotone_slack"])
    for frac, (base, lift, _) in pushforward_sweeps.items():
        violations += monotonicity_report(base, TOLERANCES["cap_monotone_slack"])
        violations += monotonicity_report(lift, TOLERANCES["cap_monotone_slack"])
    # nested refinement: closed arcs nest at (m, 2m-1), periodic circles at (m, 2m)
    spec1 = kernels.hardy_poisson(1)
    for r in (0.9, 0.99):
        c, f = nested_resolution_check(
            spec1, measures.arc_of_length(0.25, 511), r, 256, 511, **SOLVER
        )
        if c > f + TOLERANCES["cap_monotone_slack"]:
            violations.append(f"arc nested refinement violated at r={r}")
    spec2 = kernels.drury_arveson(2, "real")
    for r in (0.9, 0.99):
        c, f = nested_resolution_check(
            spec2, measures.tangential_circle(256), r, 128, 256, **SOLVER
        )
        if c > f + TOLERANCES["cap_monotone_slack"]:
            violations.append(f"circle nested refinement violated at r={r}")
    ok = not violations
    _criterion(
        "monotonicity-battery",
        ok,
        "no violations" if ok else "; ".join(violations[:5]),
    )


def test_equilibrium_certificates(
    solved_registry, hardy_sweeps, tangential_sweep, pushforward_sweeps
):
    # runs last: audits every equilibrium result the suite produced
    floor = min(eq.variational_residual for eq in solved_registry)
    ok = floor >= TOLERANCES["variational_residual_floor"]
    _criterion(
        "equilibrium-certificates",
        ok,
        f"worst variational residual={floor:.2e} over {len(solved_registry)} solves",
    )
