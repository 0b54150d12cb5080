"""Simulation checks of coverage and of P-value sub-uniformity.

Each replication simulates fresh data with a known shift, freezes its own
Monte Carlo draws and records whether the confidence set contains the truth.
Replication ``r`` takes its seeds from ``derive_seed(base_seed, r)``, so a run
is reproducible and replications are independent.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .confidence import CONVENTIONS, freeze, shift_interval
from .exceptions import PreconditionError
from .pvalues import p_plus_one
from .rng import FastGenerator, SeedLike, coerce_seed, derive_seed
from .shift_models import OneSampleData, TwoSampleData
from ._validation import check_alpha, check_choice, check_count, check_positive

MODELS = ("one_sample", "two_sample")
NOISES = ("uniform_symmetric", "two_point")
THRESHOLDS = (0.01, 0.05, 0.1, 0.25, 0.5)


@dataclass(frozen=True)
class CoverageConfig:
    """Settings of one coverage or sub-uniformity experiment.

    ``m`` is the number of treated units and is ignored by the one-sample
    model.  Noise is symmetric about zero in both models: uniform on
    ``[-scale, scale]`` or ``+/-scale`` with equal probability.
    """

    model: str = "one_sample"
    theta_true: float = 0.0
    n: int = 10
    m: Optional[int] = None
    noise: str = "uniform_symmetric"
    scale: float = 1.0
    replications: int = 1000
    alpha: float = 0.05
    N: int = 99
    base_seed: SeedLike = "coverage"
    generator: str = "sha256"
    tol: float = 1e-6
    convention: str = "bonferroni"

    def __post_init__(self):
        check_choice(self.model, "model", MODELS)
        check_choice(self.noise, "noise", NOISES)
        check_choice(self.convention, "convention", CONVENTIONS)
        check_count(self.replications, "replications", minimum=1)
        check_count(self.N, "N", minimum=0)
        check_alpha(self.alpha)
        check_positive(self.scale, "scale")
        check_positive(self.tol, "tol")
        if not math.isfinite(self.theta_true):
            raise PreconditionError("theta_true must be finite")
        if self.model == "one_sample":
            check_count(self.n, "n", minimum=1)
        else:
            m = self.n // 2 if self.m is None else self.m
            check_count(self.n, "n", minimum=2)
            if not (0 < m < self.n):
                raise PreconditionError(f"need 0 < m < n, got m={m}, n={self.n}")
            object.__setattr__(self, "m", m)

    def as_dict(self) -> dict:
        out = asdict(self)
        if isinstance(self.base_seed, (bytes, bytearray)):
            out["base_seed"] = "hex:" + bytes(self.base_seed).hex()
        return out


@dataclass(frozen=True)
class CoverageReport:
    covered: int
    R: int
    alpha: float
    empirical_coverage: float
    binomial_se: float
    mean_length: float
    unbounded: int = 0
    empty: int = 0
    seconds: float = 0.0

    @property
    def lower_band(self) -> float:
        """``1 - alpha - 3 SE``, the one-sided acceptance threshold."""
        return 1 - self.alpha - 3 * self.binomial_se

    @property
    def passed(self) -> bool:
        return self.empirical_coverage >= self.lower_band

    def as_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


@dataclass(frozen=True)
class SubuniformityReport:
    thresholds: tuple
    ecdf: tuple
    R: int
    k_se: float = 4.0

    @property
    def bounds(self) -> tuple:
        return tuple(p + self.k_se * math.sqrt(p * (1 - p) / self.R) for p in self.thresholds)

    @property
    def rows(self) -> list:
        return list(zip(self.thresholds, self.ecdf))

    @property
    def passed(self) -> bool:
        return all(f <= b for f, b in zip(self.ecdf, self.bounds))

    def as_dict(self) -> dict:
        return {"R": self.R, "rows": [[p, f, b] for (p, f), b in zip(self.rows, self.bounds)],
                "passed": self.passed}


def _replication_seeds(cfg: CoverageConfig, r: int) -> tuple[bytes, bytes]:
    base = coerce_seed(cfg.base_seed)
    return derive_seed(base, r, b"data"), derive_seed(base, r, b"draws")


def simulate(cfg: CoverageConfig, seed: SeedLike):
    """One data set with true shift ``cfg.theta_true``."""
    rng = FastGenerator(seed).numpy
    if cfg.noise == "uniform_symmetric":
        noise = rng.uniform(-cfg.scale, cfg.scale, size=cfg.n)
    else:
        noise = cfg.scale * (2.0 * rng.integers(0, 2, size=cfg.n) - 1.0)
    if cfg.model == "one_sample":
        return OneSampleData(cfg.theta_true + noise)
    w = noise.copy()
    w[:cfg.m] += cfg.theta_true
    return TwoSampleData(w, cfg.m)


def run_coverage(cfg: CoverageConfig) -> CoverageReport:
    """Fraction of two-sided intervals that contain ``theta_true``.

    Unbounded intervals count as covering; empty sets as not covering.  The
    standard error is the binomial one at the nominal level,
    ``sqrt(alpha (1 - alpha) / R)``.
    """
    start = time.perf_counter()
    covered = unbounded = empty = 0
    lengths = []
    for r in range(cfg.replications):
        data_seed, draw_seed = _replication_seeds(cfg, r)
        data = simulate(cfg, data_seed)
        res = shift_interval(data, cfg.alpha, cfg.N, draw_seed, tol=cfg.tol,
                             convention=cfg.convention, generator=cfg.generator)
        if math.isnan(res.lower):
            empty += 1
            continue
        if res.lower <= cfg.theta_true <= res.upper:
            covered += 1
        length = res.upper - res.lower
        if math.isinf(length):
            unbounded += 1
        else:
            lengths.append(length)
    R = cfg.replications
    return CoverageReport(
        covered=covered, R=R, alpha=cfg.alpha, empirical_coverage=covered / R,
        binomial_se=math.sqrt(cfg.alpha * (1 - cfg.alpha) / R),
        mean_length=float(np.mean(lengths)) if lengths else math.inf,
        unbounded=unbounded, empty=empty, seconds=time.perf_counter() - start,
    )


PValueRule = Callable[[float, np.ndarray], float]


def run_subuniformity(cfg: CoverageConfig, pvalue: PValueRule = p_plus_one,
                      thresholds=THRESHOLDS, k_se: float = 4.0) -> SubuniformityReport:
    """Empirical CDF of the upper-tail P-value at the true shift.

    ``pvalue(t_obs, t_reps)`` turns the observed statistic and the replicate
    statistics into a P-value; swapping in a deliberately broken rule is how
    the check is shown to have teeth.
    """
    ps = np.empty(cfg.replications)
    for r in range(cfg.replications):
        data_seed, draw_seed = _replication_seeds(cfg, r)
        data = simulate(cfg, data_seed)
        draws = freeze(data, cfg.N, draw_seed, cfg.generator)
        eta = cfg.theta_true
        if isinstance(data, OneSampleData):
            t_obs, t_reps = data.observed_stat(eta), draws.t0 - eta * draws.adj
        else:
            t_obs, t_reps = data.observed_difference, draws.t0 + eta * draws.adj
        ps[r] = pvalue(t_obs, t_reps) if cfg.N else 1.0
    thresholds = tuple(float(t) for t in thresholds)
    ecdf = tuple(float(np.mean(ps <= t)) for t in thresholds)
    return SubuniformityReport(thresholds, ecdf, cfg.replications, k_se)


def strict_no_plus_one(t_obs: float, t_reps: np.ndarray) -> float:
    """A wrong P-value (strict inequality, observed datum left out); for negative controls."""
    t_reps = np.asarray(t_reps)
    return float(np.count_nonzero(t_reps > t_obs)) / t_reps.shape[0]


__all__ = [
    "CoverageConfig",
    "CoverageReport",
    "SubuniformityReport",
    "simulate",
    "run_coverage",
    "run_subuniformity",
    "strict_no_plus_one",
    "THRESHOLDS",
]
