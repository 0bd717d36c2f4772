"""Experiment configuration: a versioned JSON document, unknown fields rejected.

Example::

    {
      "schema_version": 1,
      "family": "transition_grid",
      "n": 300,
      "m": [100, 200, 280],
      "s": [5, 10],
      "trials": 20,
      "seed_base": 7,
      "solver": {"K": 60, "L": 1, "step": "auto"},
      "init": {"kind": "spectral"}
    }

``s`` is the true sparsity; the solver uses ``solver.s`` when given, else ``s``.
"""

import json
from dataclasses import dataclass, fields
from dataclasses import field as _field

from ..errors import ParameterError
from ..sensing import ENSEMBLE_KINDS, FIELDS
from ..solver import SolverConfig

SCHEMA_VERSION = 1
FAMILIES = (
    "convergence",
    "timing",
    "transition_curve",
    "transition_grid",
    "reconstruct_1d",
    "reconstruct_2d",
    "dft",
)
SUCCESS_TOL = 1e-6


class ConfigError(ValueError):
    """Invalid experiment configuration; ``where`` names the field or line."""

    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where


def _int_list(name, value):
    vals = value if isinstance(value, list) else [value]
    if not vals:
        raise ConfigError(name, "range must be nonempty")
    for v in vals:
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ConfigError(name, f"expected positive integers, got {v!r}")
    return vals


@dataclass
class ExperimentConfig:
    family: str
    n: int | list = 1000
    m: int | list = 800
    s: int | list = 10
    trials: int = 1
    seed_base: int = 0
    field: str = "real"
    ensemble: str | None = None
    sigma: float = 0.0
    solver: dict = _field(default_factory=dict)
    init: dict = _field(default_factory=lambda: {"kind": "spectral"})
    algorithm: str = "grahtp"
    levels: int = 4
    decay: float = 0.8
    image: str | None = None
    image_size: int = 32
    keep: int | None = None
    target_r: float = 1e-12
    noise_seed_offset: int = 0
    trace: bool | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"unsupported version {self.schema_version!r}")
        if self.family not in FAMILIES:
            raise ConfigError("family", f"unknown family {self.family!r}; choose from {FAMILIES}")
        self.n_values = _int_list("n", self.n)
        self.m_values = _int_list("m", self.m)
        self.s_values = _int_list("s", self.s)
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials", "must be an integer >= 1")
        if not isinstance(self.seed_base, int) or self.seed_base < 0:
            raise ConfigError("seed_base", "must be a nonnegative integer")
        if self.field not in FIELDS:
            raise ConfigError("field", f"must be one of {FIELDS}")
        if self.ensemble is None:
            self.ensemble = "partial_dft" if self.family == "dft" else "complex_gaussian"
        if self.ensemble not in ENSEMBLE_KINDS:
            raise ConfigError("ensemble", f"must be one of {ENSEMBLE_KINDS}")
        if not isinstance(self.sigma, (int, float)) or self.sigma < 0:
            raise ConfigError("sigma", "must be a nonnegative number")
        self._check_init()
        if self.family == "dft":
            if self.init["kind"] == "spectral":
                raise ConfigError(
                    "init", "spectral init is not supported for the dft family; "
                    'use {"kind": "oracle_perturbed", "r": 0.8}'
                )
            if self.ensemble != "partial_dft":
                raise ConfigError("ensemble", "the dft family requires partial_dft")
        if self.family in ("transition_curve", "convergence", "dft", "reconstruct_1d",
                           "reconstruct_2d") and len(self.n_values) != 1:
            raise ConfigError("n", f"family {self.family} takes a single n")
        if self.family == "transition_curve" and len(self.s_values) != 1:
            raise ConfigError("s", "transition_curve takes a single s; use transition_grid")
        if self.family in ("convergence", "dft", "timing", "reconstruct_1d", "reconstruct_2d"):
            if len(self.m_values) != 1 or len(self.s_values) != 1:
                raise ConfigError("m", f"family {self.family} takes a single m and s")
        for n in self.n_values:
            if self.ensemble == "partial_dft" and max(self.m_values) > n:
                raise ConfigError("m", f"partial_dft needs m <= n (n={n})")
            if self.family not in ("reconstruct_2d",) and max(self.s_values) > n:
                raise ConfigError("s", f"sparsity exceeds n={n}")
        if not isinstance(self.levels, int) or self.levels < 0:
            raise ConfigError("levels", "must be a nonnegative integer")
        if not isinstance(self.decay, (int, float)) or not 0 < self.decay <= 1:
            raise ConfigError("decay", "must lie in (0, 1]")
        if self.family == "reconstruct_1d" and self.n_values[0] % (1 << self.levels):
            raise ConfigError("n", f"must be divisible by 2**levels = {1 << self.levels}")
        if self.family == "reconstruct_2d" and self.image is None and (
            self.image_size % (1 << self.levels)
        ):
            raise ConfigError("image_size", f"must be divisible by 2**levels = {1 << self.levels}")
        if self.algorithm != "grahtp":
            from .experiments import SOLVERS

            if self.algorithm not in SOLVERS:
                raise ConfigError("algorithm", f"no solver registered as {self.algorithm!r}")
        try:
            self.solver_config(self.s_values[0])
        except (ParameterError, TypeError) as exc:
            raise ConfigError("solver", str(exc)) from exc

    def _check_init(self):
        init = self.init
        if not isinstance(init, dict) or init.get("kind") not in ("spectral", "oracle_perturbed"):
            raise ConfigError("init.kind", "must be 'spectral' or 'oracle_perturbed'")
        extra = set(init) - {"kind", "r"}
        if extra:
            raise ConfigError("init", f"unknown fields {sorted(extra)}")
        if init["kind"] == "oracle_perturbed":
            r = init.get("r", 0.8)
            if not isinstance(r, (int, float)) or not 0 < r < 1:
                raise ConfigError("init.r", "must lie in (0, 1)")
            init["r"] = float(r)

    def solver_config(self, s):
        opts = dict(self.solver)
        opts.setdefault("s", s)
        if self.family == "dft":
            opts.setdefault("K", 10)
        return SolverConfig.from_dict(opts)

    @property
    def write_traces(self):
        if self.trace is not None:
            return self.trace
        return self.family in ("convergence", "dft")

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def config_from_dict(d):
    if not isinstance(d, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(unknown[0], f"unknown field(s) {unknown}")
    if "family" not in d:
        raise ConfigError("family", "missing required field")
    try:
        return ExperimentConfig(**d)
    except TypeError as exc:
        raise ConfigError("<root>", str(exc)) from exc


def load_config(path, family=None, seed=None):
    """Read and validate a config file; ``family``/``seed`` override the file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno} col {exc.colno}", exc.msg) from exc
    except OSError as exc:
        raise ConfigError(str(path), exc.strerror or str(exc)) from exc
    if isinstance(data, dict):
        if family is not None:
            if data.get("family", family) != family:
                raise ConfigError("family", f"config declares {data['family']!r}, command wants {family!r}")
            data["family"] = family
        if seed is not None:
            data["seed_base"] = seed
    return config_from_dict(data)
