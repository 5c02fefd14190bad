"""Command-line interface: config + flag parsing, subcommand dispatch, and
report emission.

Exit codes: 0 success, 1 scenario failure, 2 configuration error.
"""

import argparse
import os
import sys

import numpy as np

from . import backend, reporting
from .capacity import (
    CapacityError,
    GramianProblem,
    build_unboundedness_function,
    capacity_sweep,
    solve_dual,
    solve_equilibrium,
)
from .config import ConfigError, RunConfig, config_from_dict, dump_config, load_config
from .energy import energy_limit, required_series_degree
from .kernels import FAMILIES, KernelError, VARIANTS
from .maximal import (
    equilibrium_potential_function,
    normalized_kernel_function,
    weak_type_experiment,
)
from .measures import MeasureError, arc_of_length
from .scenarios import SCENARIOS, run_all, run_scenario


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ballcap",
        description="Kernel energies, capacities, equilibrium measures and "
        "maximal-function statistics on the complex unit ball.",
    )
    parser.add_argument("--config", help="YAML config file; flags override it")
    parser.add_argument("--out", help="output directory (overrides BALLCAP_OUT)")
    parser.add_argument("--seed", type=int, help="seed for randomized components")
    parser.add_argument("--tol", type=float, help="solver gap tolerance (relative)")
    parser.add_argument("--threads", type=int, help="worker threads for parallel scans")
    parser.add_argument(
        "--format", help="comma-separated output formats (json,csv)", default=None
    )
    parser.add_argument("--kernel", choices=FAMILIES, help="kernel family")
    parser.add_argument("--variant", choices=VARIANTS, help="kernel variant")
    parser.add_argument("--param", type=float, help="kernel family parameter")
    parser.add_argument("--d", type=int, help="ambient complex dimension")
    parser.add_argument(
        "--set",
        dest="set_kind",
        choices=("finite-points", "arc", "flat-circle", "tangential-circle", "product-lift"),
        help="boundary set kind",
    )
    parser.add_argument("--arc-length", type=float, help="arc length as a fraction of the circle")
    parser.add_argument("--resolution", type=int, help="set discretization size")
    parser.add_argument("--r-depth", type=int, help="dyadic radius schedule depth")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("energy", help="energy sweep of the uniform measure on the set")
    sub.add_parser("cap", help="capacity sweep over the (r, resolution) grid")
    sub.add_parser("eqmeasure", help="equilibrium weights at the finest cell")
    sub.add_parser("dual", help="dual certificate at the finest cell")
    p_max = sub.add_parser("maximal", help="weak-type ratio experiment")
    p_max.add_argument("--alpha", default="2,4", help="comma-separated apertures")
    p_max.add_argument("--t-grid", default=None, help="comma-separated absolute thresholds")
    p_max.add_argument("--grid-size", type=int, default=512, help="boundary grid size")
    p_unb = sub.add_parser("unbounded", help="stagewise blow-up construction")
    p_unb.add_argument("--stages", type=int, default=10)
    p_scn = sub.add_parser("scenario", help="run a named scenario or 'all'")
    p_scn.add_argument("name", choices=sorted(SCENARIOS) + ["all"])
    p_scn.add_argument("--fast", action="store_true", help="reduced-size run")
    sub.add_parser("kernels-list", help="list kernel families and variants")
    return parser


def _assemble_config(args):
    cfg = load_config(args.config) if args.config else config_from_dict({})
    if args.kernel:
        cfg.kernel.family = args.kernel
    if args.variant:
        cfg.kernel.variant = args.variant
    if args.param is not None:
        cfg.kernel.parameter = args.param
    if args.d:
        cfg.kernel.dimension = args.d
    if args.set_kind:
        cfg.set.kind = args.set_kind
    if args.arc_length is not None:
        cfg.set.kind = "arc"
        cfg.set.arc_start = 0.0
        cfg.set.arc_end = 2.0 * np.pi * args.arc_length
    if args.resolution:
        cfg.set.resolution = args.resolution
    if args.r_depth:
        cfg.r_depth = args.r_depth
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol is not None:
        cfg.solver.tol = args.tol
    if args.threads is not None:
        cfg.threads = args.threads
    if args.out:
        cfg.output.directory = args.out
    elif os.environ.get("BALLCAP_OUT"):
        cfg.output.directory = os.environ["BALLCAP_OUT"]
    if args.format:
        cfg.output.formats = [f.strip() for f in args.format.split(",") if f.strip()]
    # revalidate after overrides
    config_from_dict(cfg.to_dict())
    return cfg


def _solver_kwargs(cfg):
    return {
        "tol": cfg.solver.tol,
        "gap_abs": cfg.solver.gap_abs,
        "max_iter": cfg.solver.max_iterations,
    }


def _cmd_energy(cfg, outdir):
    spec = cfg.build_kernel()
    mu = cfg.build_set().uniform_measure()
    with_series = mu.size <= 64 and spec.dimension <= 3
    degree = None
    if with_series:
        degree = required_series_degree(spec, mu, cfg.r_schedule()[-1], tol=1e-9)
        with_series = degree <= 200
    report = energy_limit(
        spec,
        mu,
        r_schedule=cfg.r_schedule(),
        with_series=with_series,
        series_degree=degree,
    )
    paths = reporting.emit_energy_report(report, outdir, formats=cfg.output.formats)
    tail = report.e_r_values[-1]
    print(
        f"energy: {report.classification}, E at r={cfg.r_schedule()[-1]:.8f} is "
        f"{tail:.10g}; wrote {', '.join(paths)}"
    )
    return 0


def _sweep(cfg):
    spec = cfg.build_kernel()
    set_desc = cfg.build_set()
    resolutions = cfg.resolution_list()
    if set_desc.kind == "product-lift":
        resolutions = [
            (cfg.set.circle_resolution, m) for m in resolutions
        ]
    return capacity_sweep(
        spec, set_desc, cfg.r_schedule(), resolutions, **_solver_kwargs(cfg)
    )


def _cmd_cap(cfg, outdir):
    est = _sweep(cfg)
    paths = reporting.emit_capacity_estimate(est, outdir, formats=cfg.output.formats)
    print(
        f"cap: {est.classification}, extrapolated {est.extrapolated_cap:.8g} "
        f"at r={est.agreement_r:.8f}; wrote {', '.join(paths)}"
    )
    return 0


def _cmd_eqmeasure(cfg, outdir):
    est = _sweep(cfg)
    paths = reporting.emit_equilibrium(est, outdir, formats=cfg.output.formats)
    eq = est.equilibrium
    print(
        f"eqmeasure: energy {eq.energy:.10g}, cap_r {eq.cap_r:.8g}, "
        f"gap {eq.fw_gap:.2e}; wrote {', '.join(paths)}"
    )
    return 0


def _cmd_dual(cfg, outdir):
    spec = cfg.build_kernel()
    set_desc = cfg.build_set()
    r = cfg.r_schedule()[-1]
    problem = GramianProblem.from_spec(spec, set_desc.discretize(), r)
    dual = solve_dual(problem, tol=cfg.solver.tol, gap_abs=cfg.solver.gap_abs)
    payload = {
        "schema": "ballcap/dual/v1",
        "r": dual.r,
        "norm_sq": dual.norm_sq,
        "min_re_on_f": dual.min_re_on_f,
        "dual_value": dual.dual_value,
        "primal_energy": dual.primal_energy,
        "duality_residual": dual.dual_value * dual.primal_energy - 1.0,
        "coefficients": [float(c) for c in dual.coefficients],
    }
    path = reporting.write_json(payload, os.path.join(outdir, "dual.json"))
    print(
        f"dual: value {dual.dual_value:.10g}, residual "
        f"{payload['duality_residual']:.2e}; wrote {path}"
    )
    return 0


def _cmd_maximal(cfg, outdir, args):
    spec = cfg.build_kernel()
    if (spec.family, spec.variant) not in (
        ("hardy-poisson", "real"),
        ("drury-arveson", "pluriharmonic"),
        ("weighted-dirichlet", "real"),
        ("dirichlet-log", "real"),
    ):
        raise ConfigError(
            "maximal: kernel must be hardy-poisson/real, drury-arveson/pluriharmonic, "
            "weighted-dirichlet/real or dirichlet-log/real"
        )
    alphas = [float(a) for a in args.alpha.split(",")]
    zeta = np.zeros(spec.dimension, dtype=complex)
    zeta[0] = 1.0
    functions = [
        normalized_kernel_function(spec, (1.0 - 2.0**-k) * zeta, f"kernel-r{k}")
        for k in range(1, 6)
    ]
    functions.append(
        equilibrium_potential_function(
            spec,
            arc_of_length(0.25, 64, dimension=1)
            if spec.dimension == 1
            else _flat_arc(spec.dimension),
            1.0 - 2.0**-6,
            "equilibrium-arc",
            tol=cfg.solver.tol,
            gap_abs=cfg.solver.gap_abs,
        )
    )
    if args.t_grid:
        grids = [[float(t) for t in args.t_grid.split(",")]] * len(functions)
    else:
        grids = [list(np.geomspace(1.0, 8.0, 5)) for _ in functions]
    table = weak_type_experiment(
        spec,
        functions,
        alphas,
        grids,
        grid_size=args.grid_size,
        seed=cfg.seed,
        solver_tol=cfg.solver.tol,
        solver_gap_abs=cfg.solver.gap_abs,
    )
    paths = reporting.emit_weak_type(table, outdir, formats=cfg.output.formats)
    print(
        f"maximal: {len(table.rows)} rows, max ratio {table.max_ratio():.6g}; "
        f"wrote {', '.join(paths)}"
    )
    return 0


def _flat_arc(dimension):
    from .measures import arc

    center = np.zeros(dimension, dtype=complex)
    center[0] = 1.0
    return arc(0.0, np.pi / 2, 64, center=center)


def _cmd_unbounded(cfg, outdir, args):
    spec = cfg.build_kernel()
    set_desc = cfg.build_set()
    radii = [1.0 - 4.0 ** (-n) for n in range(1, args.stages + 1)]
    # classify on the configured (deep) schedule, not the construction stages
    sweep = capacity_sweep(
        spec,
        set_desc,
        cfg.r_schedule(),
        cfg.resolution_list(),
        **_solver_kwargs(cfg),
    )
    construction = build_unboundedness_function(
        spec,
        set_desc,
        radii,
        classification_sweep=sweep,
        tol=cfg.solver.tol,
        gap_abs=cfg.solver.gap_abs,
    )
    payload = {
        "schema": "ballcap/unbounded/v1",
        "stages": construction.stages(),
        "radii": construction.radii,
        "caps": [float(c) for c in construction.caps],
        "norm_budget": construction.norm_budget(),
        "norm_exact": float(np.sqrt(construction.norm_sq_exact())),
        "min_re_on_set": construction.min_re_on_set(),
    }
    path = reporting.write_json(payload, os.path.join(outdir, "unbounded.json"))
    print(
        f"unbounded: {payload['stages']} stages, min Re on set "
        f"{payload['min_re_on_set']:.6g}, norm {payload['norm_exact']:.6g} <= "
        f"budget {payload['norm_budget']:.6g}; wrote {path}"
    )
    return 0


def _cmd_scenario(cfg, outdir, args):
    reports = run_all(fast=args.fast) if args.name == "all" else [
        run_scenario(args.name, fast=args.fast)
    ]
    all_ok = True
    for report in reports:
        paths = reporting.emit_scenario(report, outdir)
        report.artifacts.extend(paths)
        status = "PASS" if report.passed else "FAIL"
        print(f"scenario {report.scenario_id}: {status} ({len(report.checks)} checks)")
        if not report.passed:
            all_ok = False
            for check in report.checks:
                if not check.passed:
                    print(
                        f"  FAIL {check.name}: observed {check.observed:.8g}, "
                        f"expected {check.expected:.8g} ({check.kind}, tol {check.tolerance:g})"
                    )
    return 0 if all_ok else 1


def _cmd_kernels_list():
    print("families:")
    rows = [
        ("drury-arveson", "geometric coefficients; closed form 1/(1-s)"),
        ("dirichlet-log", "log-weighted coefficients; closed form 1 - log(1-s)"),
        ("weighted-dirichlet", "parameter a in (0,1); closed form (1-s)^-a"),
        ("hardy-poisson", "two-sided unit coefficients; boundary-values kernel"),
        ("bounded", "parameter q in (0,1]; closed form 1/(1-qs)"),
        ("custom", "two-column coefficient file (index, value); series evaluation"),
    ]
    for name, desc in rows:
        print(f"  {name:20s} {desc}")
    print("variants: " + ", ".join(VARIANTS))
    print(f"backend: {backend.BACKEND}")
    return 0


def dispatch(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "kernels-list":
        return _cmd_kernels_list()
    try:
        cfg = _assemble_config(args)
    except (ConfigError, KernelError, MeasureError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    backend.set_threads(cfg.threads)
    outdir = cfg.output.directory
    os.makedirs(outdir, exist_ok=True)
    try:
        if args.command == "energy":
            return _cmd_energy(cfg, outdir)
        if args.command == "cap":
            return _cmd_cap(cfg, outdir)
        if args.command == "eqmeasure":
            return _cmd_eqmeasure(cfg, outdir)
        if args.command == "dual":
            return _cmd_dual(cfg, outdir)
        if args.command == "maximal":
            return _cmd_maximal(cfg, outdir, args)
        if args.command == "unbounded":
            return _cmd_unbounded(cfg, outdir, args)
        if args.command == "scenario":
            return _cmd_scenario(cfg, outdir, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, KernelError, MeasureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    parser.error(f"unhandled command {args.command}")


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
