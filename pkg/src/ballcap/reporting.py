"""Report emission: versioned JSON documents and CSV tables with documented
columns.  Floating-point values are written with 17 significant digits so the
artifacts round-trip exactly.
"""

import json
import os


def _format_float(v):
    return f"{float(v):.17g}"


def write_json(payload, path):
    if "schema" not in payload:
        raise ValueError("JSON reports must carry a schema field")
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_csv(rows, columns, path, comment=None):
    """Rows of floats/ints/strings; a '#' header documents the columns."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("# columns: " + ", ".join(columns) + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            cells = []
            for v in row:
                if isinstance(v, str):
                    cells.append(v)
                elif isinstance(v, (int,)) and not isinstance(v, bool):
                    cells.append(str(v))
                else:
                    cells.append(_format_float(v))
            fh.write(",".join(cells) + "\n")
    return path


def emit_energy_report(report, outdir, stem="energy", formats=("json", "csv")):
    paths = []
    if "json" in formats:
        paths.append(write_json(report.to_dict(), os.path.join(outdir, f"{stem}.json")))
    if "csv" in formats:
        paths.append(
            write_csv(
                report.rows(),
                ["r", "E_r", "series_E_r", "increment"],
                os.path.join(outdir, f"{stem}.csv"),
                comment="dilated energies over the radius grid",
            )
        )
    return paths


def emit_capacity_estimate(est, outdir, stem="cap", formats=("json", "csv")):
    paths = []
    if "json" in formats:
        paths.append(write_json(est.to_dict(), os.path.join(outdir, f"{stem}.json")))
    if "csv" in formats:
        rows = []
        for mi, m in enumerate(est.resolutions):
            label = "x".join(str(v) for v in m) if isinstance(m, (tuple, list)) else str(m)
            for ri, r in enumerate(est.r_grid):
                rows.append((label, r, est.cap[mi, ri]))
        paths.append(
            write_csv(
                rows,
                ["resolution", "r", "cap_r"],
                os.path.join(outdir, f"{stem}.csv"),
                comment="capacity grid; nan marks solver failures",
            )
        )
    return paths


def emit_equilibrium(est, outdir, stem="eqmeasure", formats=("json", "csv")):
    paths = []
    eq = est.equilibrium
    if eq is None:
        raise ValueError("estimate carries no equilibrium weights")
    if "json" in formats:
        payload = {
            "schema": "ballcap/equilibrium/v1",
            "kernel": est.kernel_label,
            "set": est.set_label,
            **eq.summary(),
            "weights": [float(v) for v in eq.weights],
        }
        paths.append(write_json(payload, os.path.join(outdir, f"{stem}.json")))
    if "csv" in formats:
        pts = est.equilibrium_points
        mu = eq.as_measure(pts)
        path = os.path.join(outdir, f"{stem}.csv")
        os.makedirs(outdir, exist_ok=True)
        mu.to_csv(path)
        paths.append(path)
    return paths


def emit_weak_type(table, outdir, stem="maximal", formats=("json", "csv")):
    paths = []
    if "json" in formats:
        paths.append(write_json(table.to_dict(), os.path.join(outdir, f"{stem}.json")))
    if "csv" in formats:
        rows = [
            (row.label, row.alpha, row.t, row.cap_estimate, row.ratio)
            for row in table.rows
        ]
        paths.append(
            write_csv(
                rows,
                ["label", "alpha", "t", "cap_estimate", "ratio"],
                os.path.join(outdir, f"{stem}.csv"),
                comment="weak-type ratios cap * t^2 / norm^2 over the t grid",
            )
        )
    return paths


def emit_scenario(report, outdir, formats=("json",)):
    return [
        write_json(
            report.to_dict(), os.path.join(outdir, f"scenario-{report.scenario_id}.json")
        )
    ]
