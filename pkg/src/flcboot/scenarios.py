"""Independent-cluster simulation designs.

==========  ==========  ============  =================  ==================
setting     fixed cols  random cols   tested             D
==========  ==========  ============  =================  ==================
S1          2           2             R1=R2=0            2x2, given
S2          2           3             R2=R3=0 | R1       D11=1, 2x2 block
S3          8           4             R3=R4=0 | R1,R2    Wishart + tau
==========  ==========  ============  =================  ==================

Fixed design: an intercept plus iid N(0, covariate_sd^2) columns.  Random
design per cluster: a random intercept plus iid N(0, covariate_sd^2)
columns.  Z is stored effect-major, i.e. its columns are
``[R1 for clusters 1..n, R2 for clusters 1..n, ...]``; this is a column
permutation of the usual block-diagonal layout and puts the untested
effects first, as ``DesignMatrices.r0`` requires.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .distributions import ErrorDistribution, draw_error_vector, draw_mvnormal, draw_wishart, pivoted_cholesky
from .errors import DomainError, NotPSD
from .projection import DesignMatrices

__all__ = [
    "GeneratedDataset",
    "ScenarioSpec",
    "Setting",
    "draw_random_effects",
    "generate",
    "setting2_D",
    "setting3_D",
    "tested_split",
]


class Setting(str, enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"


FIXED_COLUMNS = {Setting.S1: 2, Setting.S2: 2, Setting.S3: 8}
RANDOM_COLUMNS = {Setting.S1: 2, Setting.S2: 3, Setting.S3: 4}
UNTESTED_EFFECTS = {Setting.S1: 0, Setting.S2: 1, Setting.S3: 2}

WISHART_DF = 3
WISHART_SCALE = 0.5
MAX_REDRAWS = 100


def setting2_D(block) -> np.ndarray:
    """Embed the tested 2x2 block under D11 = 1 with zero cross-covariance."""
    D = np.zeros((3, 3))
    D[0, 0] = 1.0
    D[1:, 1:] = np.asarray(block, dtype=float)
    return D


def setting3_D(top_left, tau: float) -> np.ndarray:
    D = np.full((4, 4), tau / 2.0)
    D[:2, :2] = top_left
    D[2, 2] = D[3, 3] = tau
    return D


def _as_matrix(D):
    return None if D is None else tuple(tuple(float(v) for v in row) for row in np.atleast_2d(D))


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation cell.

    ``D`` is the full random-effect covariance (2x2 for S1, 3x3 for S2; a 2x2
    given for S2 is read as the tested block and embedded).  S3 ignores ``D``
    and builds it from ``tau`` per dataset.  ``r0_override`` replaces the
    setting's number of untested effects, e.g. 3 to test R4 alone in S3.
    """

    setting: Setting
    n_clusters: int
    cluster_size: int
    D: tuple | None = None
    tau: float = 0.0
    error: ErrorDistribution = field(default_factory=ErrorDistribution)
    beta: tuple | None = None
    seed: int = 0
    r0_override: int | None = None
    label: str | None = None
    covariate_sd: float = 1.0

    def __post_init__(self):
        setting = Setting(self.setting)
        object.__setattr__(self, "setting", setting)
        if self.n_clusters < 1 or self.cluster_size < 1:
            raise DomainError("n_clusters and cluster_size must be positive")
        q = RANDOM_COLUMNS[setting]
        if setting is Setting.S3:
            if self.tau < 0:
                raise DomainError(f"tau must be >= 0, got {self.tau}")
            object.__setattr__(self, "D", None)
        else:
            if self.D is None:
                raise DomainError(f"{setting.value} needs a covariance matrix D")
            D = np.asarray(self.D, dtype=float)
            if setting is Setting.S2 and D.shape == (2, 2):
                D = setting2_D(D)
            if D.shape != (q, q):
                raise DomainError(f"{setting.value} needs a {q}x{q} D, got shape {D.shape}")
            pivoted_cholesky(D)  # raises unless symmetric PSD
            object.__setattr__(self, "D", _as_matrix(D))
        if not isinstance(self.error, ErrorDistribution):
            object.__setattr__(self, "error", ErrorDistribution(self.error))
        p = FIXED_COLUMNS[setting]
        if self.beta is not None:
            beta = tuple(float(b) for b in self.beta)
            if len(beta) != p:
                raise DomainError(f"{setting.value} needs {p} fixed coefficients, got {len(beta)}")
            object.__setattr__(self, "beta", beta)
        if self.r0_override is not None and not 0 <= self.r0_override < q:
            raise DomainError(f"r0_override must lie in [0, {q - 1}]")
        if not self.covariate_sd > 0:
            raise DomainError("covariate_sd must be positive")

    @property
    def N(self) -> int:
        return self.n_clusters * self.cluster_size

    @property
    def r0_effects(self) -> int:
        return UNTESTED_EFFECTS[self.setting] if self.r0_override is None else self.r0_override

    @property
    def beta_vector(self) -> np.ndarray:
        if self.beta is None:
            return np.ones(FIXED_COLUMNS[self.setting])
        return np.asarray(self.beta)

    def D_label(self) -> str:
        if self.label:
            return self.label
        if self.setting is Setting.S3:
            return f"tau={self.tau:g}"
        block = np.asarray(self.D)
        if self.setting is Setting.S2:
            block = block[1:, 1:]
        return "; ".join(" ".join(f"{v:g}" for v in row) for row in block)


@dataclass(frozen=True)
class GeneratedDataset:
    design: DesignMatrices
    truth: ScenarioSpec
    null_is_true: bool
    D: np.ndarray
    effects: np.ndarray
    cluster: np.ndarray


def _tested_block_zero(D: np.ndarray, r0: int) -> bool:
    return bool(np.all(D[r0:, :] == 0.0) and np.all(D[:, r0:] == 0.0))


def tested_split(spec: ScenarioSpec) -> tuple[int, bool]:
    """Number of untested random effects and whether the tested part of D is zero."""
    r0 = spec.r0_effects
    if spec.setting is Setting.S3:
        return r0, spec.tau == 0.0
    return r0, _tested_block_zero(np.asarray(spec.D), r0)


def _realized_D(spec: ScenarioSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.setting is not Setting.S3:
        return np.asarray(spec.D)
    for _ in range(MAX_REDRAWS):
        W = draw_wishart(WISHART_DF, WISHART_SCALE * np.eye(2), rng)
        D = setting3_D(W, spec.tau)
        try:
            pivoted_cholesky(D)
        except NotPSD:
            continue
        return D
    raise NotPSD(f"no PSD Setting 3 covariance after {MAX_REDRAWS} Wishart draws (tau={spec.tau})")


def draw_random_effects(spec: ScenarioSpec, rng: np.random.Generator, D=None) -> np.ndarray:
    """Cluster effects b_1..b_n as an (n, q) array, iid N(0, D)."""
    D = _realized_D(spec, rng) if D is None else np.asarray(D)
    return draw_mvnormal(D, spec.n_clusters, rng)


def generate(spec: ScenarioSpec, rng: np.random.Generator | None = None) -> GeneratedDataset:
    """Simulate y = X beta + Z b + eps for one dataset."""
    if rng is None:
        rng = rngmod.stream(spec.seed)
    n, m, N = spec.n_clusters, spec.cluster_size, spec.N
    p, q = FIXED_COLUMNS[spec.setting], RANDOM_COLUMNS[spec.setting]
    cluster = np.repeat(np.arange(n), m)
    rows = np.arange(N)

    X = np.ones((N, p))
    X[:, 1:] = spec.covariate_sd * rng.standard_normal((N, p - 1))
    covariates = np.ones((N, q))
    covariates[:, 1:] = spec.covariate_sd * rng.standard_normal((N, q - 1))
    Z = np.zeros((N, q * n))
    for e in range(q):
        Z[rows, e * n + cluster] = covariates[:, e]

    D = _realized_D(spec, rng)
    b = draw_random_effects(spec, rng, D)
    eps = draw_error_vector(spec.error, N, rng)
    y = X @ spec.beta_vector + np.sum(covariates * b[cluster], axis=1) + eps

    r0 = spec.r0_effects
    design = DesignMatrices(y, X, Z, r0 * n)
    if spec.setting is Setting.S3:
        null_true = spec.tau == 0.0
    else:
        null_true = _tested_block_zero(D, r0)
    return GeneratedDataset(design, spec, null_true, D, b, cluster)
