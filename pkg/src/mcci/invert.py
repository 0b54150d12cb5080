"""Conservative bisection for confidence bounds from step-function P-values.

A monotone P-value is first bracketed by doubling steps from a trial value,
then bisected while keeping ``p(a) < alpha <= p(b)`` (lower bound) or the
mirror image (upper bound).  The returned endpoint is always the rejected
side of the final bracket, so a discontinuity can only make the answer
wider, never narrower.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from .exceptions import ContractError, EmptyConfidenceSetError, PreconditionError
from .pvalues import PValueFn, Shape, two_sided
from ._validation import check_alpha, check_count, check_positive


@dataclass(frozen=True)
class SearchConfig:
    alpha: float
    e: float = 1e-8
    delta0: float = 1.0
    eta0: float = 0.0
    max_doublings: int = 60

    def __post_init__(self):
        check_alpha(self.alpha)
        check_positive(self.e, "tolerance e")
        check_positive(self.delta0, "initial step delta0")
        if not math.isfinite(self.eta0):
            raise PreconditionError("eta0 must be finite")
        check_count(self.max_doublings, "max_doublings", minimum=0)


@dataclass(frozen=True)
class ConfidenceResult:
    """Endpoints plus everything needed to reproduce them.

    ``lower``/``upper`` are infinite when a side is unbounded or was not
    requested, and NaN when the confidence set is empty.
    """

    lower: float
    upper: float
    alpha: float
    e: Optional[float] = None
    N: Optional[int] = None
    seed: Optional[bytes] = None
    side: str = "two-sided"
    convention: Optional[str] = None
    p_at_eta0: Optional[float] = None
    evaluations: int = 0
    diagnostics: tuple = ()
    lower_closed: Optional[bool] = None
    upper_closed: Optional[bool] = None
    method: str = "bisection"

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def interval(self) -> tuple[float, float]:
        return self.lower, self.upper


@dataclass
class _Counter:
    p: PValueFn
    count: int = 0

    def __call__(self, eta: float) -> float:
        self.count += 1
        return self.p(eta)


@dataclass
class _Search:
    value: float
    status: str = "ok"
    notes: list = field(default_factory=list)


def check_floor(p: PValueFn, alpha: float) -> None:
    if p.floor is not None and alpha <= p.floor:
        raise PreconditionError(
            f"alpha={alpha:g} is at or below the smallest attainable P-value {p.floor:g}, "
            "so no hypothesis can be rejected; with N replicates the highest non-trivial "
            "confidence level is N/(N+1) for a one-sided bound. Increase the number of "
            "replicates or raise alpha."
        )


def _bisect(P, alpha: float, a: float, b: float, e: float, reject_low: bool, out: _Search) -> float:
    """Shrink ``[a, b]`` to width ``e``; ``reject_low`` says which end is rejected."""
    while b - a > e:
        mid = a + (b - a) / 2
        if not (a < mid < b):
            out.notes.append("resolution_limited")
            break
        rejected = P(mid) < alpha
        if rejected == reject_low:
            a = mid
        else:
            b = mid
    return a if reject_low else b


def _search_lower(P, cfg: SearchConfig, p0: Optional[float] = None) -> _Search:
    out = _Search(math.nan)
    alpha, delta = cfg.alpha, cfg.delta0
    if p0 is None:
        p0 = P(cfg.eta0)
    if p0 >= alpha:
        b, eta = cfg.eta0, cfg.eta0 - delta
        doublings = 0
        while P(eta) >= alpha:
            doublings += 1
            if doublings > cfg.max_doublings or not math.isfinite(eta):
                out.value, out.status = -math.inf, "unbounded"
                return out
            delta *= 2
            eta -= delta
        a = eta
    else:
        a, eta = cfg.eta0, cfg.eta0 + delta
        doublings = 0
        while P(eta) < alpha:
            doublings += 1
            if doublings > cfg.max_doublings or not math.isfinite(eta):
                out.value, out.status = math.inf, "empty"
                return out
            delta *= 2
            eta += delta
        b = eta
    out.value = _bisect(P, alpha, a, b, cfg.e, True, out)
    return out


def _search_upper(P, cfg: SearchConfig, p0: Optional[float] = None) -> _Search:
    out = _Search(math.nan)
    alpha, delta = cfg.alpha, cfg.delta0
    if p0 is None:
        p0 = P(cfg.eta0)
    if p0 >= alpha:
        a, eta = cfg.eta0, cfg.eta0 + delta
        doublings = 0
        while P(eta) >= alpha:
            doublings += 1
            if doublings > cfg.max_doublings or not math.isfinite(eta):
                out.value, out.status = math.inf, "unbounded"
                return out
            delta *= 2
            eta += delta
        b = eta
    else:
        b, eta = cfg.eta0, cfg.eta0 - delta
        doublings = 0
        while P(eta) < alpha:
            doublings += 1
            if doublings > cfg.max_doublings or not math.isfinite(eta):
                out.value, out.status = -math.inf, "empty"
                return out
            delta *= 2
            eta -= delta
        a = eta
    out.value = _bisect(P, alpha, a, b, cfg.e, False, out)
    return out


def _require_shape(p: PValueFn, allowed: tuple, what: str) -> list:
    if p.shape not in allowed + (Shape.UNKNOWN,):
        raise ContractError(f"{what} needs a {' or '.join(s.value for s in allowed)} "
                            f"P-value, got {p.shape.value}")
    return ["shape_unverified"] if p.shape is Shape.UNKNOWN else []


def _info(search: _Search, P: _Counter) -> dict:
    return {"status": search.status, "evaluations": P.count, "notes": list(search.notes)}


def lower_bound(p: PValueFn, cfg: SearchConfig, full_output: bool = False):
    """Conservative lower confidence bound from a nondecreasing P-value.

    Returns a point ``a`` with ``p(a) < alpha`` lying within ``cfg.e`` below
    the largest valid bound.  ``-inf`` means the P-value never fell below
    ``alpha`` within ``max_doublings`` doublings; ``+inf`` means it never
    rose to ``alpha`` (empty set).  With ``full_output`` a diagnostics dict
    is returned as well.
    """
    _require_shape(p, (Shape.NONDECREASING,), "lower_bound")
    check_floor(p, cfg.alpha)
    P = _Counter(p)
    search = _search_lower(P, cfg)
    return (search.value, _info(search, P)) if full_output else search.value


def upper_bound(p: PValueFn, cfg: SearchConfig, full_output: bool = False):
    """Conservative upper confidence bound from a nonincreasing P-value."""
    _require_shape(p, (Shape.NONINCREASING,), "upper_bound")
    check_floor(p, cfg.alpha)
    P = _Counter(p)
    search = _search_upper(P, cfg)
    return (search.value, _info(search, P)) if full_output else search.value


def _diagnostics(side: str, search: _Search) -> list:
    out = [f"{side}_{search.status}"] if search.status != "ok" else []
    return out + [f"{side}_{n}" for n in search.notes]


def one_sided_interval(p: PValueFn, cfg: SearchConfig, side: str, convention=None) -> ConfidenceResult:
    """Wrap :func:`lower_bound` or :func:`upper_bound` in a :class:`ConfidenceResult`.

    ``side="lower"`` expects the upper-tail (nondecreasing) P-value and
    reports ``[a, inf)``; ``side="upper"`` the mirror image.
    """
    if side == "lower":
        diags = _require_shape(p, (Shape.NONDECREASING,), "a lower bound")
        search_fn = _search_lower
    elif side == "upper":
        diags = _require_shape(p, (Shape.NONINCREASING,), "an upper bound")
        search_fn = _search_upper
    else:
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    check_floor(p, cfg.alpha)
    P = _Counter(p)
    p0 = P(cfg.eta0)
    search = search_fn(P, cfg, p0)
    diags += _diagnostics(side, search)
    value = search.value
    if search.status == "empty":
        lower = upper = math.nan
    elif side == "lower":
        lower, upper = value, math.inf
    else:
        lower, upper = -math.inf, value
    return ConfidenceResult(lower, upper, cfg.alpha, e=cfg.e, side=side, convention=convention,
                            p_at_eta0=p0, evaluations=P.count, diagnostics=tuple(diags))


def quasiconcave_interval(p: PValueFn, cfg: SearchConfig, convention=None) -> ConfidenceResult:
    """Two bisections outward from a non-rejected trial value ``cfg.eta0``."""
    diags = _require_shape(p, (Shape.QUASICONCAVE, Shape.NONDECREASING, Shape.NONINCREASING),
                           "a two-sided interval")
    check_floor(p, cfg.alpha)
    P = _Counter(p)
    p0 = P(cfg.eta0)
    if p0 < cfg.alpha:
        raise EmptyConfidenceSetError(
            f"P-value at eta0={cfg.eta0:g} is {p0:g} < alpha={cfg.alpha:g}; choose an eta0 that "
            "is not rejected, or the Monte Carlo confidence set may be empty"
        )
    lo = _search_lower(P, cfg, p0)
    hi = _search_upper(P, cfg, p0)
    diags += _diagnostics("lower", lo) + _diagnostics("upper", hi)
    return ConfidenceResult(lo.value, hi.value, cfg.alpha, e=cfg.e, side="two-sided",
                            convention=convention, p_at_eta0=p0, evaluations=P.count,
                            diagnostics=tuple(diags))


def two_sided_interval(p_up: PValueFn, p_lo: PValueFn, cfg: SearchConfig) -> ConfidenceResult:
    """Interval from the Bonferroni combination of two one-sided P-values."""
    return quasiconcave_interval(two_sided(p_up, p_lo), cfg, convention="bonferroni")
