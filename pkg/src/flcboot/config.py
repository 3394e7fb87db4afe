"""Experiment configuration files.

The format is the flat subset of TOML: top-level ``key = value`` lines and
repeated ``[[scenario]]`` / ``[[method]]`` sections, nothing nested deeper.
``SCHEMA_TEXT`` is the full grammar; ``flcboot print-schema`` prints it.
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .bootstrap import BootstrapPlan, Variant
from .distributions import ErrorDistribution, ErrorTag
from .errors import ConfigError, FlcError
from .flctest import Method
from .scenarios import ScenarioSpec, Setting

__all__ = ["ExperimentConfig", "MethodSpec", "SCHEMA_TEXT", "SCHEMA_VERSION", "load_config", "parse_config"]

SCHEMA_VERSION = 1

SCHEMA_TEXT = """\
# flcboot experiment configuration, schema 1
#
# File syntax is TOML restricted to top-level keys and arrays of tables.
# Comments start with '#'.  Keys not listed here are rejected.

schema = 1                  # required, must be 1
replicates = 1000           # datasets per scenario, >= 1
seed = 20240101             # 64-bit master seed
alpha = 0.05                # nominal level in (0, 1); reject when p < alpha
workers = 1                 # worker processes, >= 1
output = "results.csv"      # CSV written by `run`

# One [[scenario]] section per simulation cell.  n, m, error and tau may
# also be given as lists; the section then expands to their product.
[[scenario]]
setting = "S1"              # "S1" | "S2" | "S3"
n = 10                      # number of clusters
m = 3                       # cluster size
D = [[0.05, 0.02], [0.02, 0.05]]  # S1: full 2x2; S2: tested 2x2 block; S3: unused
tau = 0.0                   # S3 only, >= 0
error = "student"           # "normal" | "student" | "chisq" | "2CMM"
sigma = 1.0                 # error scale, optional
beta = [1.0, 1.0]           # fixed effects, optional (default all ones)
label = "D2"                # D_label column, optional (default derived from D / tau)
r0 = 0                      # untested random effects, optional override (S3: 3 tests R4 alone)
covariate_sd = 1.0          # sd of generated covariates, optional

# One [[method]] section per test.
[[method]]
name = "FDB"                # "FLC" | "BT" | "BT_NONNULL" | "BT_MN" | "FDB" | "DB"
B = 199                     # first-level bootstrap samples (B1 for DB)
B2 = 99                     # DB second-level samples
mn = 20                     # BT_MN subsample size, or "auto" for the variance-ratio rule
"""

_TOP_KEYS = {"schema", "replicates", "seed", "alpha", "workers", "output", "scenario", "method"}
_SCENARIO_KEYS = {"setting", "n", "m", "D", "tau", "error", "sigma", "beta", "label", "r0", "covariate_sd"}
_METHOD_KEYS = {"name", "B", "B2", "mn"}

_VARIANT_OF = {
    Method.BT: Variant.NULL_RESIDUAL,
    Method.BT_NONNULL: Variant.NONNULL_RESIDUAL,
    Method.BT_MN: Variant.M_OUT_OF_N,
    Method.FDB: Variant.FAST_DOUBLE,
    Method.DB: Variant.DOUBLE,
}


@dataclass(frozen=True)
class MethodSpec:
    """A test to run on every dataset; ``mn`` is an int or ``"auto"`` for BT_MN."""

    method: Method
    B: int = 199
    B2: int = 99
    mn: int | str | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.method is Method.BT_MN:
            if self.mn is None:
                raise ConfigError("BT_MN needs mn (an integer or \"auto\")")
            if self.mn != "auto" and not (isinstance(self.mn, int) and self.mn >= 1):
                raise ConfigError(f"mn must be a positive integer or \"auto\", got {self.mn!r}")
        if self.method is not Method.FLC:
            try:
                self.plan(seed=0, m=1 if self.mn is not None else None)
            except FlcError as exc:
                raise ConfigError(str(exc)) from exc

    def plan(self, seed: int, m: int | None = None) -> BootstrapPlan:
        variant = _VARIANT_OF[self.method]
        return BootstrapPlan(variant, B=self.B, B2=self.B2, m=m, seed=seed)


@dataclass
class ExperimentConfig:
    scenarios: list[ScenarioSpec]
    methods: list[MethodSpec]
    replicates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    workers: int = 1
    output_path: str = "results.csv"

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.scenarios:
            raise ConfigError("at least one scenario is required")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for spec in self.scenarios:
            for ms in self.methods:
                if isinstance(ms.mn, int) and ms.mn > spec.N:
                    raise ConfigError(f"mn={ms.mn} exceeds N={spec.N} for scenario {spec.D_label()}")


def _listify(value):
    return value if isinstance(value, list) else [value]


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _int(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    return value


def _scenarios(section: dict, index: int) -> list[ScenarioSpec]:
    _check_keys(section, _SCENARIO_KEYS, f"scenario #{index + 1}")
    if "setting" not in section or "n" not in section or "m" not in section:
        raise ConfigError(f"scenario #{index + 1} needs setting, n and m")
    try:
        setting = Setting(section["setting"])
    except ValueError:
        raise ConfigError(f"unknown setting {section['setting']!r}") from None
    out = []
    grid = itertools.product(
        _listify(section["n"]), _listify(section["m"]),
        _listify(section.get("error", "normal")), _listify(section.get("tau", 0.0)),
    )
    for n, m, error, tau in grid:
        try:
            out.append(ScenarioSpec(
                setting=setting,
                n_clusters=_int(n, "n"),
                cluster_size=_int(m, "m"),
                D=section.get("D"),
                tau=float(tau),
                error=ErrorDistribution(ErrorTag.parse(error), float(section.get("sigma", 1.0))),
                beta=section.get("beta"),
                r0_override=section.get("r0"),
                label=section.get("label"),
                covariate_sd=float(section.get("covariate_sd", 1.0)),
            ))
        except FlcError as exc:
            raise ConfigError(f"scenario #{index + 1}: {exc}") from exc
    return out


def _method(section: dict, index: int) -> MethodSpec:
    _check_keys(section, _METHOD_KEYS, f"method #{index + 1}")
    try:
        method = Method(section.get("name"))
    except ValueError:
        raise ConfigError(f"unknown method {section.get('name')!r}") from None
    return MethodSpec(
        method,
        B=_int(section.get("B", 199), "B"),
        B2=_int(section.get("B2", 99), "B2"),
        mn=section.get("mn"),
    )


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config syntax: {exc}") from exc
    _check_keys(raw, _TOP_KEYS, "top level")
    if raw.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"config must declare schema = {SCHEMA_VERSION}")
    scenarios = [s for i, sec in enumerate(raw.get("scenario", [])) for s in _scenarios(sec, i)]
    methods = [_method(sec, i) for i, sec in enumerate(raw.get("method", []))]
    return ExperimentConfig(
        scenarios=scenarios,
        methods=methods,
        replicates=_int(raw.get("replicates", 1000), "replicates"),
        alpha=float(raw.get("alpha", 0.05)),
        seed=_int(raw.get("seed", 0), "seed"),
        workers=_int(raw.get("workers", 1), "workers"),
        output_path=str(raw.get("output", "results.csv")),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)
