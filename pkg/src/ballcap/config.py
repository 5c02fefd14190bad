"""Run configuration: schema-validated nested key/value config with strict
unknown-key rejection, YAML round-tripping, and flag overrides.
"""

from dataclasses import asdict, dataclass, field

import numpy as np
import yaml

from . import kernels, measures
from .energy import dyadic_radii
from .tolerances import TOLERANCES


class ConfigError(ValueError):
    """Invalid configuration; the message carries the offending key path."""


@dataclass
class KernelConfig:
    family: str = "drury-arveson"
    dimension: int = 2
    variant: str = "real"
    parameter: float | None = None
    truncation_degree: int = 4096
    coefficients_file: str | None = None


@dataclass
class SetConfig:
    kind: str = "flat-circle"
    resolution: int = 256
    arc_start: float = 0.0
    arc_end: float = float(2.0 * np.pi)
    base: list = field(default_factory=lambda: [0.0])  # angles of base points
    circle_resolution: int = 1024  # circle factor of the lifted product set
    points: list = field(default_factory=list)  # finite-points rows


@dataclass
class SolverConfig:
    tol: float = TOLERANCES["solver_gap_rel"]
    gap_abs: float = TOLERANCES["solver_gap_abs"]
    max_iterations: int = 200_000


@dataclass
class OutputConfig:
    directory: str = "ballcap-out"
    formats: list = field(default_factory=lambda: ["json", "csv"])


@dataclass
class RunConfig:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    set: SetConfig = field(default_factory=SetConfig)
    r_depth: int = 14
    r_values: list = field(default_factory=list)  # explicit schedule wins
    resolutions: list = field(default_factory=list)
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 1234
    threads: int = 0
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self):
        return asdict(self)

    def r_schedule(self):
        if self.r_values:
            return list(self.r_values)
        return dyadic_radii(self.r_depth)

    def resolution_list(self):
        if self.resolutions:
            return [int(m) for m in self.resolutions]
        m = int(self.set.resolution)
        return sorted({max(1, m // 2), m})

    def build_kernel(self):
        kc = self.kernel
        if kc.family == "custom":
            if not kc.coefficients_file:
                raise ConfigError("kernel.coefficients_file: required for custom family")
            seq = kernels.CoefficientSequence.from_file(
                kc.coefficients_file, kc.truncation_degree
            )
            return kernels.custom_kernel(seq, kc.dimension, kc.variant)
        return kernels.make_kernel(
            kc.family, kc.dimension, kc.variant, kc.parameter, kc.truncation_degree
        )

    def build_set(self):
        sc = self.set
        d = self.kernel.dimension
        if sc.kind == "arc":
            return measures.arc(sc.arc_start, sc.arc_end, sc.resolution, dimension=d)
        if sc.kind == "flat-circle":
            return measures.flat_circle(sc.resolution, dimension=d)
        if sc.kind == "tangential-circle":
            base = np.exp(1j * np.asarray(sc.base, dtype=float))
            return measures.tangential_circle(sc.resolution, base=base)
        if sc.kind == "product-lift":
            return measures.product_lift(
                sc.arc_start, sc.arc_end, (sc.circle_resolution, sc.resolution)
            )
        if sc.kind == "finite-points":
            rows = np.asarray(sc.points, dtype=float)
            if rows.ndim != 2 or rows.shape[1] != 2 * d:
                raise ConfigError(
                    f"set.points: expected rows of {2 * d} reals for dimension {d}"
                )
            pts = rows[:, 0::2] + 1j * rows[:, 1::2]
            return measures.finite_points(pts, d)
        raise ConfigError(f"set.kind: unknown kind {sc.kind!r}")


_SECTION_TYPES = {
    "kernel": KernelConfig,
    "set": SetConfig,
    "solver": SolverConfig,
    "output": OutputConfig,
}


def _fill_dataclass(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping")
    fields = cls.__dataclass_fields__
    kwargs = {}
    for key, value in data.items():
        if key not in fields:
            raise ConfigError(f"{path}.{key}: unknown key")
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a mapping")
    top_fields = RunConfig.__dataclass_fields__
    kwargs = {}
    for key, value in data.items():
        if key not in top_fields:
            raise ConfigError(f"{key}: unknown key")
        if key in _SECTION_TYPES:
            kwargs[key] = _fill_dataclass(_SECTION_TYPES[key], value, key)
        else:
            kwargs[key] = value
    cfg = RunConfig(**kwargs)
    validate(cfg)
    return cfg


def validate(cfg):
    kc = cfg.kernel
    if kc.family not in kernels.FAMILIES:
        raise ConfigError(f"kernel.family: unknown family {kc.family!r}")
    if kc.variant not in kernels.VARIANTS:
        raise ConfigError(f"kernel.variant: unknown variant {kc.variant!r}")
    if kc.dimension < 1:
        raise ConfigError("kernel.dimension: must be >= 1")
    if kc.family == "weighted-dirichlet" and not (
        kc.parameter is not None and 0 < kc.parameter < 1
    ):
        raise ConfigError("kernel.parameter: weighted-dirichlet needs 0 < parameter < 1")
    if kc.family == "bounded" and not (
        kc.parameter is not None and 0 < kc.parameter <= 1
    ):
        raise ConfigError("kernel.parameter: bounded needs 0 < parameter <= 1")
    if cfg.set.kind not in measures.SET_KINDS:
        raise ConfigError(f"set.kind: unknown kind {cfg.set.kind!r}")
    if int(cfg.set.resolution) < 1:
        raise ConfigError("set.resolution: must be >= 1")
    if cfg.r_depth < 1:
        raise ConfigError("r_depth: must be >= 1")
    for i, r in enumerate(cfg.r_values):
        if not 0.0 <= float(r) < 1.0:
            raise ConfigError(f"r_values[{i}]: radius must lie in [0, 1)")
    if cfg.solver.tol <= 0 or cfg.solver.gap_abs <= 0:
        raise ConfigError("solver.tol, solver.gap_abs: must be positive")
    if cfg.solver.max_iterations < 1:
        raise ConfigError("solver.max_iterations: must be >= 1")
    if cfg.threads < 0:
        raise ConfigError("threads: must be >= 0")
    for fmt in cfg.output.formats:
        if fmt not in ("json", "csv"):
            raise ConfigError(f"output.formats: unknown format {fmt!r}")
    if cfg.set.kind == "finite-points":
        try:
            rows = np.asarray(cfg.set.points, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"set.points: rows must be numeric ({exc})")
        if rows.size and (np.linalg.norm(
            rows[:, 0::2] + 1j * rows[:, 1::2], axis=1
        ) > 1.0 + 1e-12).any():
            raise ConfigError("set.points: a point leaves the closed ball")
    return cfg


def load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    return config_from_dict(data)


def dump_config(cfg, path=None):
    text = yaml.safe_dump(cfg.to_dict(), sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text
