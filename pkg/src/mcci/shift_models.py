"""One-sample symmetric-shift and two-sample constant-shift models.

Each Monte Carlo replicate is reduced to two numbers, its statistic at zero
shift (``t0``) and the coefficient of the shift (``adj``), so the statistic at
any hypothesized shift ``eta`` costs one multiply-add:

* one-sample, sum of signed deviations: ``t0 - eta * adj`` with
  ``t0 = sum(sigma * x)`` and ``adj = sum(sigma)``;
* two-sample, difference in means: ``t0 + eta * adj`` with
  ``adj = delta * (1/m + 1/(n - m))``, where ``delta`` counts the originally
  treated units that a re-assignment moves to control.

Both coefficients make the upper-tail indicator nondecreasing in ``eta``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .exceptions import ContractError, DegenerateWeightsError, InputError
from .pvalues import (
    FrozenDraws,
    PValueFn,
    ReplicateSummary,
    Scheme,
    Shape,
    Tail,
    plus_one_ratio,
    two_sided,
)
from .rng import Generator, assignment_matrix, random_signs, sign_matrix
from ._validation import check_sample

__all__ = [
    "OneSampleData",
    "TwoSampleData",
    "ReplicateSummary",
    "ShiftFamily",
    "LOCATION",
    "shift_transform",
    "one_sample_freeze",
    "one_sample_freeze_subset",
    "one_sample_stat",
    "two_sample_freeze",
    "two_sample_stat",
    "studentized_stats",
    "make_pvalue_fn",
    "default_start",
]

ESTIMATORS = ("plus_one", "fixed_subset", "weighted_fixed", "weighted_self", "weighted_assignments")
STATISTICS = ("difference", "studentized")


@dataclass(frozen=True)
class OneSampleData:
    x: np.ndarray

    def __post_init__(self):
        x = check_sample(self.x, name="x")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def total(self) -> float:
        return float(np.sum(self.x))

    def observed_stat(self, eta):
        """Sum of deviations from ``eta``."""
        return self.total - self.n * eta


@dataclass(frozen=True)
class TwoSampleData:
    """Responses in canonical order: the first ``m`` units were treated."""

    w: np.ndarray
    m: int

    def __post_init__(self):
        w = check_sample(self.w, name="w", min_size=2)
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        m = int(self.m)
        if not (0 < m < w.shape[0]):
            raise InputError(f"need 0 < m < n, got m={m}, n={w.shape[0]}")
        object.__setattr__(self, "m", m)

    @classmethod
    def from_groups(cls, values, groups, treatment_label=None) -> "TwoSampleData":
        """Build from a value column and a two-level label column.

        The first label seen is the treatment group unless ``treatment_label``
        says otherwise.  Order within each group is preserved.
        """
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        groups = np.asarray(groups, dtype=object).reshape(-1)
        if values.shape != groups.shape:
            raise InputError("values and groups must have the same length")
        labels = list(dict.fromkeys(groups.tolist()))
        if len(labels) > 2:
            raise InputError(f"expected two groups, found {len(labels)}: {labels}")
        if treatment_label is None:
            if not labels:
                raise InputError("no observations")
            treatment_label = labels[0]
        if treatment_label not in labels:
            raise InputError(f"treatment label {treatment_label!r} not among {labels}")
        if len(labels) < 2:
            raise InputError(f"expected two groups, found only {labels}")
        is_t = np.array([g == treatment_label for g in groups.tolist()], dtype=bool)
        return cls(np.concatenate([values[is_t], values[~is_t]]), int(is_t.sum()))

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def treated(self) -> np.ndarray:
        return self.w[:self.m]

    @property
    def control(self) -> np.ndarray:
        return self.w[self.m:]

    @property
    def observed_difference(self) -> float:
        return float(np.mean(self.treated) - np.mean(self.control))

    @property
    def coefficient(self) -> float:
        """``1/m + 1/(n - m)``, the statistic change per swapped pair per unit shift."""
        return 1.0 / self.m + 1.0 / (self.n - self.m)

    def observed_stat(self, eta):
        """Difference in means; the original assignment makes it free of ``eta``."""
        return self.observed_difference + 0.0 * eta


ShiftData = Union[OneSampleData, TwoSampleData]


@dataclass(frozen=True)
class ShiftFamily:
    """A pair of mutually inverse maps ``(x, eta) -> x'``."""

    forward: Callable
    inverse: Callable


LOCATION = ShiftFamily(forward=lambda x, eta: x + eta, inverse=lambda x, eta: x - eta)


def shift_transform(data, eta: float, family: ShiftFamily = LOCATION, inverse: bool = False):
    """Apply ``family.forward`` (or ``family.inverse``) to array-like data."""
    x = np.asarray(data, dtype=np.float64)
    return family.inverse(x, eta) if inverse else family.forward(x, eta)


def one_sample_stat(summary, eta):
    """Statistic of a sign-flip replicate at shift ``eta``.

    Works on a :class:`ReplicateSummary` or, elementwise, on a
    :class:`FrozenDraws`.
    """
    return summary.t0 - eta * summary.adj


def two_sample_stat(summary, eta):
    """Statistic of a re-assignment replicate at shift ``eta``."""
    return summary.t0 + eta * summary.adj


def _seed_meta(gen: Generator) -> dict:
    return {"seed": gen.seed, "generator": gen.kind}


def _sign_summaries(signs: np.ndarray, x: np.ndarray):
    s = signs.astype(np.float64)
    return s @ x, s.sum(axis=1)


def one_sample_freeze(data: OneSampleData, n_replicates: int, gen: Generator,
                      threads: int | None = None) -> FrozenDraws:
    """Draw ``n_replicates`` sign vectors and keep ``(sum(sigma*x), sum(sigma))``."""
    if n_replicates < 0:
        raise InputError("n_replicates must be nonnegative")
    signs = sign_matrix(gen, n_replicates, data.n, threads=threads)
    t0, adj = _sign_summaries(signs, data.x)
    return FrozenDraws(t0, adj, scheme=Scheme.PERMUTATION_SAMPLE, **_seed_meta(gen))


def one_sample_freeze_subset(data: OneSampleData, subset, gen: Generator) -> FrozenDraws:
    """Replicates ``g_j * g_hat`` for a fixed set of sign vectors and one random ``g_hat``.

    ``subset`` is a ``(k, n)`` array of +/-1 rows and must contain the
    all-plus row (the identity).  Sign flips are their own inverses, so
    composing with ``g_hat`` is an elementwise product.
    """
    subset = np.asarray(subset)
    if subset.ndim != 2 or subset.shape[1] != data.n or subset.shape[0] < 1:
        raise InputError(f"subset must be a (k, {data.n}) array of signs")
    if not np.all(np.abs(subset) == 1):
        raise InputError("subset entries must be +1 or -1")
    if not np.any(np.all(subset == 1, axis=1)):
        raise InputError("subset must include the identity (all +1) element")
    g_hat = random_signs(gen, data.n)
    t0, adj = _sign_summaries(subset.astype(np.int8) * g_hat, data.x)
    return FrozenDraws(t0, adj, scheme=Scheme.PERMUTATION_FIXED_SUBSET, **_seed_meta(gen))


def two_sample_freeze(data: TwoSampleData, n_replicates: int, gen: Generator,
                      threads: int | None = None, keep_assignments: bool = False) -> FrozenDraws:
    """Draw ``n_replicates`` re-assignments by simple random sampling.

    Keeps the difference in means at zero shift and ``delta * (1/m + 1/(n-m))``.
    ``keep_assignments`` also stores the 0/1 matrix, which the Studentized
    statistic needs.
    """
    if n_replicates < 0:
        raise InputError("n_replicates must be nonnegative")
    n, m = data.n, data.m
    labels = assignment_matrix(gen, n_replicates, n, m, threads=threads)
    treated = labels.astype(np.float64)
    t0 = (treated @ data.w) / m - ((1.0 - treated) @ data.w) / (n - m)
    delta = m - labels[:, :m].sum(axis=1, dtype=np.int64)
    adj = delta * data.coefficient
    return FrozenDraws(t0, adj, scheme=Scheme.RANDOMIZATION_SAMPLE,
                       labels=labels if keep_assignments else None, **_seed_meta(gen))


def studentized_stats(data: TwoSampleData, labels: np.ndarray, eta: float) -> np.ndarray:
    """Welch t statistics of null-reconstructed responses, by full recomputation.

    Under the hypothesis ``eta`` a unit's control response is ``w - eta`` if
    it was treated and ``w`` otherwise; a re-assignment adds ``eta`` back to
    its treated units.  The statistic is centered at ``eta``.  ``labels`` may
    be one assignment or a matrix of them.
    """
    if data.m < 2 or data.n - data.m < 2:
        raise InputError("the Studentized statistic needs at least two units per group")
    L = np.atleast_2d(np.asarray(labels, dtype=np.float64))
    base = data.w.copy()
    base[:data.m] -= eta
    m, k = data.m, data.n - data.m
    st = L @ base
    sc = (1.0 - L) @ base
    sst = L @ (base * base)
    ssc = (1.0 - L) @ (base * base)
    mt, mc = st / m, sc / k
    vt = np.maximum(sst - m * mt * mt, 0.0) / (m - 1)
    vc = np.maximum(ssc - k * mc * mc, 0.0) / (k - 1)
    se = np.sqrt(vt / m + vc / k)
    diff = mt - mc
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, diff / se, np.where(diff == 0, 0.0, np.copysign(np.inf, diff)))
    return t


def default_start(data: ShiftData) -> tuple[float, float]:
    """Initial trial value and step: the point estimate and the data range."""
    if isinstance(data, OneSampleData):
        eta0, values = float(np.mean(data.x)), data.x
    else:
        eta0, values = data.observed_difference, data.w
    spread = float(np.max(values) - np.min(values))
    return eta0, spread if spread > 0 else 1.0


def _stat_pair(data: ShiftData, draws: FrozenDraws, statistic: str, absolute: bool):
    """Return ``eta -> (t_obs, t_reps)`` for the model and statistic."""
    if isinstance(data, OneSampleData):
        if statistic != "difference":
            raise ContractError("the one-sample model only supports the sum statistic")
        total, n = data.total, float(data.n)
        t0, adj = draws.t0, draws.adj

        def pair(eta):
            return total - n * eta, t0 - eta * adj

        if absolute:
            return lambda eta: tuple(np.abs(v) for v in pair(eta))
        return pair

    if statistic == "studentized":
        if draws.labels is None:
            raise ContractError("Studentized statistic needs draws frozen with keep_assignments=True")
        original = np.zeros(data.n, dtype=np.int8)
        original[:data.m] = 1

        def pair(eta):
            return float(studentized_stats(data, original, eta)[0]), studentized_stats(data, draws.labels, eta)

        if absolute:
            return lambda eta: tuple(np.abs(v) for v in pair(eta))
        return pair
    if statistic != "difference":
        raise ContractError(f"unknown statistic {statistic!r}")

    d, t0, adj = data.observed_difference, draws.t0, draws.adj
    if absolute:
        return lambda eta: (abs(d - eta), np.abs(t0 + eta * adj - eta))
    return lambda eta: (d, t0 + eta * adj)


def _tail_form(data: ShiftData, draws: FrozenDraws):
    """``(a, b)`` with ``t_rep(eta) - t_obs(eta) = a + eta*b`` and ``b >= 0``.

    Comparing ``a + eta*b`` with zero rather than two separately rounded
    statistics keeps the P-value exactly monotone in floating point, since
    rounding is monotone and ``b`` never changes sign.
    """
    if isinstance(data, OneSampleData):
        return draws.t0 - data.total, float(data.n) - draws.adj
    return draws.t0 - data.observed_difference, np.asarray(draws.adj)


def _estimator(draws: FrozenDraws, estimator: str):
    """Return ``(p_from_mask, floor)`` for a compatible estimator."""
    N, scheme = len(draws), draws.scheme
    if estimator == "plus_one":
        if scheme is Scheme.PERMUTATION_FIXED_SUBSET:
            raise ContractError("fixed-subset draws need the fixed_subset estimator")
        return (lambda mask: plus_one_ratio(int(np.count_nonzero(mask)), N)), (1.0 / (N + 1) if N else None)
    if estimator == "fixed_subset":
        if scheme is not Scheme.PERMUTATION_FIXED_SUBSET:
            raise ContractError("fixed_subset estimator needs draws from one_sample_freeze_subset")
        return (lambda mask: int(np.count_nonzero(mask)) / N), None
    if estimator in ("weighted_fixed", "weighted_self"):
        if scheme is not Scheme.SIMULATION or draws.weights is None:
            raise ContractError(f"{estimator} needs simulation-scheme draws with importance weights")
        w, w_obs = draws.weights, draws.weight_obs
        if estimator == "weighted_fixed":
            return (lambda mask: min(1.0, (w_obs + float(np.sum(w[mask]))) / (N + 1))), None
        total = w_obs + float(np.sum(w))
        if total == 0:
            raise DegenerateWeightsError("all weights are zero")
        return (lambda mask: min(1.0, (w_obs + float(np.sum(w[mask]))) / total)), None
    if estimator == "weighted_assignments":
        if scheme is not Scheme.RANDOMIZATION_SAMPLE:
            raise ContractError("weighted_assignments needs randomization-scheme draws")
        if draws.weights is None:
            w, w_obs = np.ones(N), 1.0
        else:
            w, w_obs = draws.weights, draws.weight_obs
            if np.any(w <= 0) or w_obs <= 0:
                raise ContractError("assignment probabilities must be strictly positive")
        total = w_obs + float(np.sum(w))
        return (lambda mask: min(1.0, (w_obs + float(np.sum(w[mask]))) / total)), None
    raise ContractError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")


def make_pvalue_fn(data: ShiftData, draws: FrozenDraws, tail=Tail.UPPER,
                   estimator: str = "plus_one", statistic: str = "difference") -> PValueFn:
    """P-value as a function of the hypothesized shift, over fixed draws.

    Upper-tail functions are nondecreasing and lower-tail functions
    nonincreasing for the difference statistics; their Bonferroni
    combination is quasiconcave.  The absolute-value route and the
    Studentized statistic carry no shape guarantee and are declared
    ``unknown``.
    """
    tail = Tail(tail)
    if tail is Tail.TWO_SIDED_BONFERRONI:
        up = make_pvalue_fn(data, draws, Tail.UPPER, estimator, statistic)
        lo = make_pvalue_fn(data, draws, Tail.LOWER, estimator, statistic)
        return two_sided(up, lo)

    p_of_mask, floor = _estimator(draws, estimator)
    absolute = tail is Tail.TWO_SIDED_ABS
    pair = _stat_pair(data, draws, statistic, absolute)

    if statistic == "difference" and not absolute:
        a, b = _tail_form(data, draws)
        if tail is Tail.LOWER:
            def p(eta):
                return p_of_mask(a + eta * b <= 0)
            shape = Shape.NONINCREASING
        else:
            def p(eta):
                return p_of_mask(a + eta * b >= 0)
            shape = Shape.NONDECREASING
        return PValueFn(p, shape, floor, label=f"{type(data).__name__}:{tail.value}:{estimator}")

    if tail is Tail.LOWER:
        def p(eta):
            t_obs, t_reps = pair(eta)
            return p_of_mask(t_reps <= t_obs)
        shape = Shape.NONINCREASING
    else:
        def p(eta):
            t_obs, t_reps = pair(eta)
            return p_of_mask(t_reps >= t_obs)
        shape = Shape.NONDECREASING if tail is Tail.UPPER else Shape.UNKNOWN

    if statistic != "difference":
        shape = Shape.UNKNOWN
    return PValueFn(p, shape, floor, label=f"{type(data).__name__}:{tail.value}:{estimator}")
