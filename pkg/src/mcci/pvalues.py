"""Conservative Monte Carlo P-values computed over a frozen set of replicates.

All tail comparisons are weak (``>=`` for the upper tail, ``<=`` for the
lower tail), so ties always count against rejection.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from .exceptions import ContractError, DegenerateWeightsError, InputError, PreconditionError


class Tail(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"
    TWO_SIDED_BONFERRONI = "two_sided_bonferroni"
    TWO_SIDED_ABS = "two_sided_abs"


class Shape(str, enum.Enum):
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"
    QUASICONCAVE = "quasiconcave"
    UNKNOWN = "unknown"


class Scheme(str, enum.Enum):
    SIMULATION = "simulation"
    PERMUTATION_SAMPLE = "permutation_sample"
    PERMUTATION_FIXED_SUBSET = "permutation_fixed_subset"
    RANDOMIZATION_SAMPLE = "randomization_sample"


@dataclass(frozen=True)
class ReplicateSummary:
    """Statistic of one replicate at zero shift plus its shift coefficient."""

    t0: float
    adj: float


def _readonly(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FrozenDraws:
    """One realization of the Monte Carlo randomness, reused for every shift.

    ``t0`` and ``adj`` hold the per-replicate summaries.  ``weights`` (with
    ``weight_obs`` for the observed datum) are importance weights or
    selection probabilities, depending on the scheme.  ``labels`` keeps the
    raw rearrangements when a statistic needs full recomputation.
    """

    t0: np.ndarray
    adj: np.ndarray
    seed: bytes = b""
    scheme: Scheme = Scheme.PERMUTATION_SAMPLE
    generator: str = "sha256"
    weights: Optional[np.ndarray] = None
    weight_obs: Optional[float] = None
    labels: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        t0 = _readonly(self.t0).reshape(-1)
        adj = _readonly(self.adj).reshape(-1)
        if t0.shape != adj.shape:
            raise InputError("t0 and adj must have the same length")
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "adj", adj)
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.weights is not None:
            w = _readonly(self.weights).reshape(-1)
            if w.shape != t0.shape:
                raise InputError("weights must have one entry per replicate")
            if self.weight_obs is None:
                raise InputError("weight_obs is required when weights are given")
            if not (np.all(np.isfinite(w)) and np.all(w >= 0)
                    and np.isfinite(self.weight_obs) and self.weight_obs >= 0):
                raise InputError("weights must be finite and nonnegative")
            object.__setattr__(self, "weights", w)
            object.__setattr__(self, "weight_obs", float(self.weight_obs))
        if self.labels is not None:
            object.__setattr__(self, "labels", _readonly(self.labels, np.int8))

    def __len__(self) -> int:
        return self.t0.shape[0]

    @property
    def n_replicates(self) -> int:
        return len(self)

    def __getitem__(self, j: int) -> ReplicateSummary:
        return ReplicateSummary(float(self.t0[j]), float(self.adj[j]))

    def __iter__(self) -> Iterator[ReplicateSummary]:
        for j in range(len(self)):
            yield self[j]


class PValueFn:
    """Deterministic map from a hypothesized shift to a P-value.

    Parameters
    ----------
    func : callable
        ``eta -> p``.  Must be pure.
    shape : Shape
        Declared monotonicity or quasiconcavity in ``eta``.
    floor : float, optional
        Smallest value the function can take, when known.  Inversion refuses
        significance levels at or below it.
    """

    def __init__(self, func: Callable[[float], float], shape=Shape.UNKNOWN,
                 floor: Optional[float] = None, label: str = ""):
        self._func = func
        self.shape = Shape(shape)
        self.floor = floor
        self.label = label

    def __call__(self, eta: float) -> float:
        return float(self._func(float(eta)))

    evaluate = __call__

    def grid(self, etas) -> np.ndarray:
        return np.array([self(e) for e in np.asarray(etas, dtype=float).ravel()])

    def __repr__(self) -> str:
        return f"PValueFn({self.label or 'anonymous'}, shape={self.shape.value})"


def _tail_mask(t_obs, t_reps: np.ndarray, tail) -> np.ndarray:
    tail = Tail(tail)
    if tail is Tail.UPPER:
        return t_reps >= t_obs
    if tail is Tail.LOWER:
        return t_reps <= t_obs
    raise ContractError(f"{tail.value} is not a single-tail direction; "
                        "combine one-sided P-values with two_sided()")


def _as_stats(t_reps) -> np.ndarray:
    arr = np.asarray(t_reps, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InputError("replicate statistics must be finite")
    return arr


def plus_one_ratio(count: int, n_replicates: int) -> float:
    """``(1 + count) / (1 + N)``, shared so every caller rounds identically."""
    return (1 + count) / (1 + n_replicates)


def p_plus_one(t_obs: float, t_reps, tail=Tail.UPPER) -> float:
    """Plus-one Monte Carlo P-value.

    Valid for independent draws from the null and for uniform random samples
    of group elements; the observed datum is counted once in numerator and
    denominator.

    >>> p_plus_one(3.0, [3.0, 1.0, 4.0, 3.0])
    0.8
    """
    if not np.isfinite(t_obs):
        raise InputError("observed statistic must be finite")
    reps = _as_stats(t_reps)
    count = int(np.count_nonzero(_tail_mask(t_obs, reps, tail)))
    return plus_one_ratio(count, reps.shape[0])


def p_weighted(t_obs: float, t_reps, w_obs: float, w_reps,
               variant: str = "fixed_denominator", tail=Tail.UPPER) -> float:
    """Importance-weighted simulation P-value.

    ``fixed_denominator`` divides by ``1 + N``; ``self_normalized`` divides by
    the total weight.  The result is clipped to ``[0, 1]``.
    """
    reps = _as_stats(t_reps)
    w = np.asarray(w_reps, dtype=np.float64).reshape(-1)
    if w.shape != reps.shape:
        raise InputError("w_reps must match t_reps in length")
    if not (np.all(np.isfinite(w)) and np.all(w >= 0) and np.isfinite(w_obs) and w_obs >= 0):
        raise InputError("weights must be finite and nonnegative")
    num = w_obs + float(np.sum(w[_tail_mask(t_obs, reps, tail)]))
    if variant == "fixed_denominator":
        den = 1 + reps.shape[0]
    elif variant == "self_normalized":
        den = w_obs + float(np.sum(w))
        if den == 0:
            raise DegenerateWeightsError("all weights are zero")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return min(1.0, max(0.0, num / den))


def p_fixed_subset(t_obs: float, t_reps, tail=Tail.UPPER) -> float:
    """P-value for a fixed subset of group elements composed with one random element.

    There is no plus-one term; callers include the identity in the subset so
    the result is at least ``1/N`` in practice.
    """
    reps = _as_stats(t_reps)
    if reps.shape[0] == 0:
        raise PreconditionError("the fixed subset must contain at least one element")
    return int(np.count_nonzero(_tail_mask(t_obs, reps, tail))) / reps.shape[0]


def p_weighted_assignments(t_obs: float, t_reps, probs, prob_obs: float,
                           tail=Tail.UPPER) -> float:
    """Probability-weighted randomization P-value including the observed assignment."""
    reps = _as_stats(t_reps)
    p = np.asarray(probs, dtype=np.float64).reshape(-1)
    if p.shape != reps.shape:
        raise InputError("probs must match t_reps in length")
    if not (np.all(np.isfinite(p)) and np.all(p > 0) and np.isfinite(prob_obs) and prob_obs > 0):
        raise InputError("assignment probabilities must be finite and strictly positive")
    num = prob_obs + float(np.sum(p[_tail_mask(t_obs, reps, tail)]))
    return min(1.0, num / (prob_obs + float(np.sum(p))))


def two_sided(p_up: PValueFn, p_lo: PValueFn) -> PValueFn:
    """Bonferroni combination ``min(1, 2 * min(p_up, p_lo))``.

    ``p_up`` must not be declared nonincreasing and ``p_lo`` must not be
    declared nondecreasing.  The result is quasiconcave when both inputs
    have their expected monotone shapes.
    """
    if p_up.shape not in (Shape.NONDECREASING, Shape.UNKNOWN):
        raise ContractError(f"upper-tail P-value declared {p_up.shape.value}, expected nondecreasing")
    if p_lo.shape not in (Shape.NONINCREASING, Shape.UNKNOWN):
        raise ContractError(f"lower-tail P-value declared {p_lo.shape.value}, expected nonincreasing")
    monotone = p_up.shape is Shape.NONDECREASING and p_lo.shape is Shape.NONINCREASING
    floors = [f for f in (p_up.floor, p_lo.floor) if f is not None]
    floor = min(1.0, 2 * min(floors)) if len(floors) == 2 else None

    def combined(eta: float) -> float:
        return min(1.0, 2 * min(p_up(eta), p_lo(eta)))

    return PValueFn(combined, Shape.QUASICONCAVE if monotone else Shape.UNKNOWN, floor,
                    label="two_sided_bonferroni")
