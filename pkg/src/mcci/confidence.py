"""One-call confidence sets for the shift models.

:func:`shift_interval` freezes the Monte Carlo draws once, builds the
P-value function for the requested side and convention, and inverts it by
bisection.  The estimators, the coverage harness and the command line all
go through here, so they agree bit for bit for the same arguments.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Optional

from .exceptions import EmptyConfidenceSetError, InputError
from .invert import ConfidenceResult, SearchConfig, one_sided_interval, quasiconcave_interval
from .oracle import breakpoint_scan_interval
from .pvalues import FrozenDraws, PValueFn, Tail
from .rng import SeedLike, make_generator
from .shift_models import (
    OneSampleData,
    TwoSampleData,
    default_start,
    make_pvalue_fn,
    one_sample_freeze,
    two_sample_freeze,
)
from ._validation import check_alpha, check_choice, check_count

SIDES = ("two-sided", "lower", "upper")
CONVENTIONS = ("bonferroni", "abs")

__all__ = ["SIDES", "CONVENTIONS", "freeze", "tail_for", "pvalue_function", "shift_interval"]


def tail_for(side: str, convention: str = "bonferroni") -> Tail:
    """Tail whose P-value inverts to the requested kind of confidence set."""
    check_choice(side, "side", SIDES)
    check_choice(convention, "convention", CONVENTIONS)
    if side == "lower":
        return Tail.UPPER
    if side == "upper":
        return Tail.LOWER
    return Tail.TWO_SIDED_BONFERRONI if convention == "bonferroni" else Tail.TWO_SIDED_ABS


def freeze(data, n_replicates: int, seed: SeedLike, generator: str = "sha256",
           threads: Optional[int] = None, keep_assignments: bool = False) -> FrozenDraws:
    check_count(n_replicates, "n_replicates", minimum=0)
    gen = make_generator(seed, generator)
    if isinstance(data, OneSampleData):
        return one_sample_freeze(data, n_replicates, gen, threads=threads)
    if isinstance(data, TwoSampleData):
        return two_sample_freeze(data, n_replicates, gen, threads=threads,
                                 keep_assignments=keep_assignments)
    raise InputError(f"expected OneSampleData or TwoSampleData, got {type(data).__name__}")


def pvalue_function(data, draws: FrozenDraws, side: str = "two-sided",
                    convention: str = "bonferroni", statistic: str = "difference") -> PValueFn:
    return make_pvalue_fn(data, draws, tail_for(side, convention), statistic=statistic)


def _rescue_start(data, draws, alpha, tail, statistic) -> Optional[float]:
    """A non-rejected shift found by breakpoint analysis, or None if there is none."""
    scan = breakpoint_scan_interval(data, draws, alpha, tail)
    if math.isnan(scan.lower):
        return None
    lo, hi = scan.lower, scan.upper
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return hi - 1.0
    if math.isinf(hi):
        return lo + 1.0
    # endpoints may be open; the midpoint of a connected set is inside it
    return lo + (hi - lo) / 2


def shift_interval(data, alpha: float = 0.05, n_replicates: int = 10_000,
                   seed: SeedLike = 0, tol: float = 1e-8, side: str = "two-sided",
                   convention: str = "bonferroni", generator: str = "sha256",
                   statistic: str = "difference", threads: Optional[int] = None,
                   max_doublings: int = 60, draws: Optional[FrozenDraws] = None) -> ConfidenceResult:
    """Conservative confidence set for the shift from one frozen set of draws.

    Parameters
    ----------
    data : OneSampleData or TwoSampleData
    alpha : float
        Significance level; coverage is at least ``1 - alpha``.
    n_replicates : int
        Number of Monte Carlo replicates ``N``.
    seed : str, bytes or int
        Seed of the Monte Carlo generator.
    tol : float
        Bisection tolerance ``e``; endpoints are conservative to within it.
    side : {"two-sided", "lower", "upper"}
    convention : {"bonferroni", "abs"}
        Two-sided combination: twice the smaller one-sided P-value, or the
        absolute statistic.
    draws : FrozenDraws, optional
        Reuse existing draws instead of generating new ones.

    Returns
    -------
    ConfidenceResult
        Two-sided results start the search at the point estimate.  If that
        shift is rejected the start is moved into the confidence set found by
        breakpoint analysis; an empty set gives NaN endpoints.
    """
    check_alpha(alpha)
    tail = tail_for(side, convention)
    if draws is None:
        draws = freeze(data, n_replicates, seed, generator, threads,
                       keep_assignments=statistic == "studentized")
    p = make_pvalue_fn(data, draws, tail, statistic=statistic)
    eta0, step = default_start(data)
    cfg = SearchConfig(alpha, tol, step, eta0, max_doublings)
    conv = convention if side == "two-sided" else None
    if side != "two-sided":
        result = one_sided_interval(p, cfg, side, convention=conv)
    else:
        try:
            result = quasiconcave_interval(p, cfg, convention=conv)
        except EmptyConfidenceSetError:
            if statistic != "difference":
                raise
            start = _rescue_start(data, draws, alpha, tail, statistic)
            if start is None:
                return ConfidenceResult(math.nan, math.nan, alpha, e=tol, N=len(draws),
                                        seed=draws.seed, side=side, convention=conv,
                                        p_at_eta0=p(eta0), evaluations=1,
                                        diagnostics=("empty",))
            result = quasiconcave_interval(p, replace(cfg, eta0=start), convention=conv)
            result = replace(result, diagnostics=result.diagnostics + ("start_moved",))
    return replace(result, N=len(draws), seed=draws.seed)
