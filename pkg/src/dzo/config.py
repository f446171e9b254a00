"""Declarative experiment configs: a flat YAML file with a fixed key set.

Unknown keys are errors (typos in sweep scripts should fail loudly, not run
the default). `validate_config` reports every violation without running
anything.

Keys (* = required):

    dataset*          path to a LIBSVM file, or one of the synthetic specs
                      "synthetic-hinge" | "linear" | "distance"
    dataset_name      label used in trace file names (default: path stem or
                      the synthetic spec name)
    d                 explicit feature dimension (required for synthetic
                      datasets; optional override for files)
    n_samples         synthetic-hinge: number of samples
    nnz_per_sample    synthetic-hinge: unit entries per sample
    flip_prob         synthetic-hinge: label noise (default 0.05)
    data_seed         seed for synthetic generation (default: `seed`)
    noise_scale       linear/distance: oracle noise half-width (default 0.1)
    coef_norm         linear: norm of the shared coefficient (default 1.0)
    center_norm       distance: norm of the shared center (default 0.5)
    scale_features    per-feature max-abs scaling flag (default false)
    subsample         cap per-agent shard size, 0 = off (desk-scale knob)
    n*                agent count
    graph             "erdos_renyi" (default; n = 1 uses the trivial graph)
    graph_p           edge probability (default 0.25)
    ball_radius       feasible ball radius (default 1.0)
    r_eps*            radius floor, in (0, 2 * ball_radius]
    T*                horizon, >= 1
    seed*             master seed, >= 0
    algorithms        subset of [dpoem, dsf_d, dsf_t] (default [dpoem, dsf_d])
    metric_stride     rounds between trace rows (default 10)
    output_dir*       artifact directory
    plot              render figures next to the CSVs (default true)
    dsf_eta0/dsf_mu0/dsf_alpha/dsf_beta    DSF-D schedule constants
    dsf_grid_eta0/dsf_grid_mu0             DSF-T tuning grid axes
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any

import yaml

SYNTHETIC_SPECS = ("synthetic-hinge", "linear", "distance")
ALGORITHMS = ("dpoem", "dsf_d", "dsf_t")


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the full violation list."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass
class ExperimentConfig:
    dataset: str
    n: int
    r_eps: float
    T: int
    seed: int
    output_dir: str
    dataset_name: str = ""
    d: int | None = None
    n_samples: int | None = None
    nnz_per_sample: int | None = None
    flip_prob: float = 0.05
    data_seed: int | None = None
    noise_scale: float = 0.1
    coef_norm: float = 1.0
    center_norm: float = 0.5
    scale_features: bool = False
    subsample: int = 0
    graph: str = "erdos_renyi"
    graph_p: float = 0.25
    ball_radius: float = 1.0
    algorithms: list[str] = field(default_factory=lambda: ["dpoem", "dsf_d"])
    metric_stride: int = 10
    plot: bool = True
    dsf_eta0: float = 1.0
    dsf_mu0: float = 1.0
    dsf_alpha: float = 0.5
    dsf_beta: float = 1.0
    dsf_grid_eta0: list[float] = field(default_factory=lambda: [0.01, 0.1, 1.0, 10.0])
    dsf_grid_mu0: list[float] = field(default_factory=lambda: [1e-3, 1e-2, 1e-1, 1.0])

    def resolved_name(self) -> str:
        if self.dataset_name:
            return self.dataset_name
        if self.dataset in SYNTHETIC_SPECS:
            return self.dataset.replace("synthetic-", "")
        return Path(self.dataset).stem

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


_REQUIRED = ("dataset", "n", "r_eps", "T", "seed", "output_dir")
_KNOWN_KEYS = set(ExperimentConfig.__dataclass_fields__)

_INT_KEYS = {"n", "T", "seed", "d", "n_samples", "nnz_per_sample", "data_seed",
             "subsample", "metric_stride"}
_FLOAT_KEYS = {"r_eps", "graph_p", "ball_radius", "flip_prob", "noise_scale",
               "coef_norm", "center_norm", "dsf_eta0", "dsf_mu0", "dsf_alpha",
               "dsf_beta"}
_BOOL_KEYS = {"scale_features", "plot"}
_STR_KEYS = {"dataset", "dataset_name", "graph", "output_dir"}
_LIST_KEYS = {"algorithms", "dsf_grid_eta0", "dsf_grid_mu0"}


def _coerce(raw: dict[str, Any], errors: list[str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in raw.items():
        if key not in _KNOWN_KEYS:
            errors.append(f"unknown key {key!r}")
            continue
        if key in _INT_KEYS:
            if isinstance(value, bool) or not isinstance(value, int):
                errors.append(f"{key} must be an integer, got {value!r}")
                continue
        elif key in _FLOAT_KEYS:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                errors.append(f"{key} must be a number, got {value!r}")
                continue
            value = float(value)
        elif key in _BOOL_KEYS:
            if not isinstance(value, bool):
                errors.append(f"{key} must be a boolean, got {value!r}")
                continue
        elif key in _STR_KEYS:
            if not isinstance(value, str):
                errors.append(f"{key} must be a string, got {value!r}")
                continue
        elif key in _LIST_KEYS:
            if not isinstance(value, list):
                errors.append(f"{key} must be a list, got {value!r}")
                continue
        out[key] = value
    return out


def parse_config(raw: dict[str, Any]) -> tuple[ExperimentConfig | None, list[str]]:
    """Validate a raw mapping; returns (config, []) or (None, violations)."""
    errors: list[str] = []
    if not isinstance(raw, dict):
        return None, ["config file must contain a mapping"]
    values = _coerce(dict(raw), errors)
    for key in _REQUIRED:
        if key not in values:
            errors.append(f"missing required key {key!r}")
    if errors:
        return None, errors

    cfg = ExperimentConfig(**values)

    if cfg.n < 1:
        errors.append("n must be at least 1")
    if cfg.T < 1:
        errors.append("T must be at least 1")
    if cfg.seed < 0:
        errors.append("seed must be nonnegative")
    if cfg.ball_radius <= 0:
        errors.append("ball_radius must be positive")
    elif cfg.r_eps <= 0:
        errors.append("r_eps must be positive")
    elif cfg.r_eps > 2.0 * cfg.ball_radius:
        errors.append(f"r_eps={cfg.r_eps} exceeds diameter {2.0 * cfg.ball_radius}")
    if cfg.graph != "erdos_renyi":
        errors.append(f"graph must be 'erdos_renyi', got {cfg.graph!r}")
    if not 0.0 < cfg.graph_p <= 1.0:
        errors.append(f"graph_p must lie in (0, 1], got {cfg.graph_p}")
    if cfg.metric_stride < 1:
        errors.append("metric_stride must be at least 1")
    if cfg.subsample < 0:
        errors.append("subsample must be nonnegative")
    if not cfg.algorithms:
        errors.append("algorithms must be nonempty")
    for name in cfg.algorithms:
        if name not in ALGORITHMS:
            errors.append(f"unknown algorithm {name!r}; choose from {list(ALGORITHMS)}")
    if not (cfg.dsf_grid_eta0 and cfg.dsf_grid_mu0):
        errors.append("DSF tuning grid axes must be nonempty")

    if cfg.dataset in SYNTHETIC_SPECS:
        if cfg.d is None:
            errors.append(f"synthetic dataset {cfg.dataset!r} requires explicit d")
        elif cfg.d < 1:
            errors.append("d must be positive")
        if cfg.dataset == "synthetic-hinge":
            if cfg.n_samples is None or cfg.nnz_per_sample is None:
                errors.append("synthetic-hinge requires n_samples and nnz_per_sample")
            elif cfg.n_samples < cfg.n:
                errors.append("n_samples must be at least n")
            if not 0.0 <= cfg.flip_prob < 0.5:
                errors.append("flip_prob must lie in [0, 0.5)")
    else:
        if not Path(cfg.dataset).exists():
            errors.append(f"dataset file not found: {cfg.dataset}")
        if cfg.d is not None and cfg.d < 1:
            errors.append("d must be positive")

    return (cfg, []) if not errors else (None, errors)


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate, raising ConfigError with every violation."""
    cfg, errors = read_config(path)
    if errors:
        raise ConfigError(errors)
    assert cfg is not None
    return cfg


def read_config(path: str | Path) -> tuple[ExperimentConfig | None, list[str]]:
    path = Path(path)
    if not path.exists():
        return None, [f"config file not found: {path}"]
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        return None, [f"config is not valid YAML: {exc}"]
    return parse_config(raw if raw is not None else {})
