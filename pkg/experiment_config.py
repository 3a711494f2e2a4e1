"""
Experiment configuration for the lab harness.

One JSON file per experiment, parsed into ExperimentConfig. Process-level settings
(output directory, enumeration budget, worker count, ledger location, timezone) come
from the environment / .env file.
"""

import csv
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

from dani import ApproxFunction, psi_from_dict
from diosearch import WitnessClass, q_grid
from flowlab import RenewalPlan
from lattice import DEFAULT_BUDGET
from numkit import (
    CongruenceConstraint,
    NormalizedConstraints,
    WeightPair,
    normalize_constraint,
)

load_dotenv()

ARTIFACT_VERSION = "1.0.0"
CSV_SCHEMA_VERSION = 1
THETA_BITS = 53
CAMPAIGNS = ("khintchine", "thmA", "thmB", "dilation_control", "corollary", "dani", "cusp", "joint")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


FIELD_DOCS: Dict[str, str] = {
    "m": "rows of theta (number of linear forms)",
    "n": "columns of theta (number of variables q)",
    "theta": "inline theta as an m x n nested list; omit to sample by seed",
    "theta_csv": "CSV of theta samples, one row-major sample per line",
    "seed": "64-bit seed of the Philox generator used for theta sampling",
    "samples": "number of sampled theta (campaigns, cusp, joint)",
    "classes": "congruence classes: list of {moduli, residues} over the m+n coordinates; cusp and crosscheck normalize each class on its own",
    "weights": "per-class weights {alpha, beta}; default uniform",
    "kappas": "per-class rates kappa_i; default all 1",
    "psi": "approximation function: {kind: power, c, delta[, x0]} or {kind: tabulated, xs, values | csv}",
    "c": "constant c of the strong/weak witness search (thmA)",
    "delta": "exponent delta in (0, 1) of the strong/weak witness search (thmA)",
    "eps": "epsilon for witness searches and cusp checks",
    "cusp_levels": "T values; cusp masses are estimated at eps = e^-T",
    "Qmax": "largest |q| searched",
    "Q_grid": "scales at which solution counts are reported (default 10^k up to Qmax)",
    "grid_step": "log-step h of the geometric Q grid of the weighted witness search (thmB)",
    "Qmin": "smallest Q of the geometric grid",
    "t_start": "first orbit time of series and cross-check grids",
    "t_stop": "last orbit time of series and cross-check grids",
    "t_step": "orbit time step of series and cross-check grids",
    "T_horizon": "averaging horizon of ergodic estimates",
    "window": "length of one renewal window",
    "burn_in": "orbit time at which each renewal window starts",
    "time_step": "time step inside renewal windows",
    "Tmax": "horizon of the Dani reconciliation",
    "slack": "slack constant c of the Dani reconciliation",
    "rate_span": "length of the rate-function grid (dani command)",
    "rate_step": "step of the rate-function grid (dani command)",
    "require_primitive": "weighted witness search: keep only primitive (p, q)",
    "distinct": "weighted witness search: one solution per class, pairwise distinct up to sign",
    "campaign": f"campaign kind, one of {', '.join(CAMPAIGNS)}",
    "budget": "enumeration node budget",
    "out": "output directory",
    "format": "output format, csv or json",
}


@dataclass
class ExperimentConfig:
    m: int = 1
    n: int = 1
    theta: Optional[List[List[float]]] = None
    theta_csv: Optional[str] = None
    seed: int = 0
    samples: int = 1
    classes: Optional[List[dict]] = None
    weights: Optional[List[dict]] = None
    kappas: Optional[List[float]] = None
    psi: dict = field(default_factory=lambda: {"kind": "power", "c": 1.0, "delta": 1.0})
    c: float = 1.0
    delta: float = 0.5
    eps: float = 0.5
    cusp_levels: List[float] = field(default_factory=lambda: [1.0, 1.5, 2.0, 2.5])
    Qmax: int = 100
    Q_grid: Optional[List[int]] = None
    grid_step: float = 0.05
    Qmin: float = 1.0
    t_start: float = 0.0
    t_stop: float = 3.0
    t_step: float = 0.05
    T_horizon: float = 20.0
    window: float = 10.0
    burn_in: float = 2.0
    time_step: float = 0.05
    Tmax: float = 8.0
    slack: float = math.log(2.0)
    rate_span: float = 20.0
    rate_step: float = 0.01
    require_primitive: bool = False
    distinct: bool = False
    campaign: str = "khintchine"
    budget: int = DEFAULT_BUDGET
    out: str = "runs"
    format: str = "csv"

    def __post_init__(self):
        self.validate()

    @property
    def d(self) -> int:
        return self.m + self.n

    def validate(self):
        if self.m < 1 or self.n < 1:
            raise ConfigError(f"m and n must be positive, got m={self.m}, n={self.n}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.samples < 1:
            raise ConfigError(f"samples must be at least 1, got {self.samples}")
        if self.Qmax < 1:
            raise ConfigError(f"Qmax must be at least 1, got {self.Qmax}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.campaign not in CAMPAIGNS:
            raise ConfigError(f"campaign must be one of {CAMPAIGNS}, got {self.campaign!r}")
        if self.budget < 1:
            raise ConfigError(f"budget must be positive, got {self.budget}")
        if self.theta is not None and np.shape(self.theta) != (self.m, self.n):
            raise ConfigError(f"theta must be {self.m} x {self.n}, got shape {np.shape(self.theta)}")
        for cls in self.classes or []:
            if len(cls.get("moduli", [])) != self.d or len(cls.get("residues", [])) != self.d:
                raise ConfigError(f"class {cls} must give {self.d} moduli and residues")
        if self.weights is not None and len(self.weights) != len(self.class_dicts()):
            raise ConfigError("weights must list one {alpha, beta} per class")
        if self.kappas is not None:
            if len(self.kappas) != len(self.class_dicts()) or any(k <= 0 for k in self.kappas):
                raise ConfigError("kappas must list one positive rate per class")

    # --- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"Invalid config: {e}") from e

    def config_hash(self) -> str:
        """sha256 of the canonical JSON form; the output location is not part of it."""
        data = self.to_dict()
        data.pop("out")
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    # --- derived objects -----------------------------------------------------

    def class_dicts(self) -> List[dict]:
        if self.classes:
            return list(self.classes)
        return [CongruenceConstraint.trivial(self.d).to_dict()]

    def constraints(self) -> List[CongruenceConstraint]:
        try:
            return [CongruenceConstraint.from_dict(c) for c in self.class_dicts()]
        except (KeyError, ValueError) as e:
            raise ConfigError(f"Invalid class: {e}") from e

    def weight_pairs(self) -> List[WeightPair]:
        if self.weights is None:
            return [WeightPair.uniform(self.m, self.n) for _ in self.class_dicts()]
        pairs = [WeightPair.from_dict(w) for w in self.weights]
        for wp in pairs:
            if (wp.m, wp.n) != (self.m, self.n):
                raise ConfigError(f"weights {wp.to_dict()} do not match m={self.m}, n={self.n}")
        return pairs

    def kappa_list(self) -> List[float]:
        return list(self.kappas) if self.kappas is not None else [1.0] * len(self.class_dicts())

    def normalized(self) -> NormalizedConstraints:
        return normalize_constraint(self.constraints(), self.weight_pairs())

    def witness_classes(self) -> List[WitnessClass]:
        norm = self.normalized()
        return [WitnessClass(cs, wp, k)
                for cs, wp, k in zip(norm.constraints, self.weight_pairs(), self.kappa_list())]

    def approx_function(self) -> ApproxFunction:
        try:
            return psi_from_dict(self.psi)
        except (KeyError, TypeError) as e:
            raise ConfigError(f"Invalid psi: {e}") from e

    def thetas(self) -> List[np.ndarray]:
        if self.theta is not None:
            return [np.array(self.theta, dtype=float)]
        if self.theta_csv:
            return load_theta_csv(self.theta_csv, self.m, self.n)
        return sample_thetas(self.seed, self.samples, self.m, self.n)

    def t_grid(self) -> np.ndarray:
        if self.t_step <= 0 or self.t_stop < self.t_start:
            raise ConfigError(f"Invalid time grid [{self.t_start}, {self.t_stop}] step {self.t_step}")
        count = int(math.floor((self.t_stop - self.t_start) / self.t_step + 1e-9))
        return self.t_start + self.t_step * np.arange(count + 1)

    def count_grid(self) -> List[int]:
        if self.Q_grid:
            return sorted(int(q) for q in self.Q_grid)
        grid = [10 ** k for k in range(int(math.log10(self.Qmax)) + 1)]
        return sorted(set(grid + [self.Qmax]))

    def witness_grid(self) -> np.ndarray:
        return q_grid(float(self.Qmax), self.grid_step, self.Qmin)

    def renewal_plan(self) -> RenewalPlan:
        return RenewalPlan(self.window, self.burn_in, self.time_step)


def sample_thetas(seed: int, count: int, m: int, n: int) -> List[np.ndarray]:
    """Uniform theta in [0,1)^{m x n} with 53-bit dyadic entries, from a Philox stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    numerators = rng.integers(0, 2 ** THETA_BITS, size=(count, m, n), dtype=np.int64)
    return [np.ldexp(numerators[i].astype(float), -THETA_BITS) for i in range(count)]


def load_theta_csv(path: str, m: int, n: int) -> List[np.ndarray]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                values = [float(x) for x in row]
            except ValueError:
                continue
            if len(values) != m * n:
                raise ConfigError(f"{path}: expected {m * n} entries per row, got {len(values)}")
            out.append(np.array(values).reshape(m, n))
    if not out:
        raise ConfigError(f"{path}: no theta rows found")
    return out


def load_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Could not read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return ExperimentConfig.from_dict(data)


def apply_env(config: ExperimentConfig) -> ExperimentConfig:
    """DIOLAB_OUT / DIOLAB_BUDGET override the config file."""
    out = os.environ.get("DIOLAB_OUT")
    budget = os.environ.get("DIOLAB_BUDGET")
    if out:
        config.out = out
    if budget:
        try:
            config.budget = int(budget)
        except ValueError as e:
            raise ConfigError(f"DIOLAB_BUDGET must be an integer, got {budget!r}") from e
    config.validate()
    return config


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("DIOLAB_WORKERS", "1")))
    except ValueError:
        print("Warning: DIOLAB_WORKERS is not an integer, using 1")
        return 1


def config_reference() -> str:
    """Markdown reference of every config key with its default."""
    defaults = ExperimentConfig().to_dict()
    lines = ["# Experiment config reference", "",
             "| key | default | meaning |", "|-----|---------|---------|"]
    for f in fields(ExperimentConfig):
        lines.append(f"| `{f.name}` | `{json.dumps(defaults[f.name])}` | {FIELD_DOCS.get(f.name, '')} |")
    lines += ["", "Environment: `DIOLAB_OUT`, `DIOLAB_BUDGET`, `DIOLAB_WORKERS`, "
              "`DIOLAB_DATA_PATH`, `DIOLAB_TZ` (read from the process or a `.env` file)."]
    return "\n".join(lines)
