"""Single source of truth for scenario and acceptance tolerances.

Scenario runners and the acceptance test suite both read from this table, so a
tolerance is never inlined at two call sites.
"""

TOLERANCES = {
    # arc capacities under the boundary-values kernel
    "hardy_arc_rel": 0.02,
    "hardy_arc_weight_rel": 0.05,
    "hardy_full_circle_abs": 1e-3,
    # flat circle energies
    "flat_energy_scenario_abs": 1e-6,
    "flat_energy_accept_abs": 1e-3,
    "flat_abs_integral_rel": 0.01,
    "flat_log_fit_r2": 0.99,
    # null classification
    "zero_cap_threshold": 1e-3,
    # lifted-circle identity
    "pushforward_rel": 0.05,
    # closed forms and certificates
    "single_atom_abs": 1e-12,
    "duality_rel": 1e-8,
    "variational_residual_floor": -1e-8,
    # abstract energy axioms
    "axiom_bilinear_abs": 1e-12,
    "axiom_property_slack": 1e-8,
    # moment-series cross validation
    "series_cross_rel": 1e-8,
    # weak-type experiment
    "weak_type_growth_factor": 10.0,
    # boundary blow-up construction
    "unbounded_per_term": 1e-6,
    "unbounded_min_re_rel": 1e-3,
    "unbounded_norm_slack": 1e-9,
    "unbounded_offset_bound": 0.5,
    # sweep structure
    "cap_monotone_slack": 1e-10,
    "richardson_agreement": 0.05,
    "pushforward_agreement": 0.02,
    # solver
    "solver_gap_rel": 1e-9,
    "solver_gap_abs": 1e-8,
}
