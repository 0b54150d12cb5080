"""Exact computations by enumeration and breakpoint analysis.

Every replicate's tail indicator is a sign condition on one or two linear
functions of the shift ``eta``:

* one-sided tails: ``a + b*eta >= 0`` (upper) or ``<= 0`` (lower);
* absolute-value tails: ``(a1 + b1*eta) * (a2 + b2*eta) >= 0``.

So each indicator is constant, a closed ray, a closed interval or the
complement of an open interval.  Sorting the roots once gives the P-value at
any point by binary search, and evaluating it at every root and at every gap
midpoint recovers the exact set ``{eta : p(eta) >= alpha}``, including
whether its endpoints are attained.

The same machinery runs on the full group (all ``2**n`` sign vectors, or all
``C(n, m)`` assignments) and on a set of frozen Monte Carlo replicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .exceptions import ContractError, InputError, TooLargeError
from .invert import ConfidenceResult
from .pvalues import FrozenDraws, Tail
from .shift_models import OneSampleData, TwoSampleData
from ._validation import check_alpha

MAX_GROUP_SIZE = 2**25
MAX_SCAN_REPLICATES = 2**20
_MAX_DECIMALS = 6
_EXACT_LIMIT = 2.0**52

__all__ = [
    "FullGroupIndex",
    "full_group_index",
    "full_group_pvalue",
    "full_group_interval",
    "breakpoints",
    "breakpoint_scan_interval",
    "MAX_GROUP_SIZE",
    "MAX_SCAN_REPLICATES",
]


# ---------------------------------------------------------------------------
# indicator sets and the superlevel-set scan


class _IndicatorSets:
    """Weighted family of step indicators in ``eta``, queried in bulk."""

    def __init__(self, weights: Optional[np.ndarray] = None):
        self.integer = weights is None
        self.const = 0
        self.parts = []  # (kind, lo, hi, w)

    @staticmethod
    def _w(w, mask):
        return None if w is None else w[mask]

    def _sum(self, w, mask) -> float:
        return int(np.count_nonzero(mask)) if w is None else float(np.sum(w[mask]))

    @classmethod
    def linear(cls, a, b, upper: bool, w=None) -> "_IndicatorSets":
        """``a + b*eta >= 0`` when ``upper`` else ``a + b*eta <= 0``."""
        if not upper:
            a, b = -a, -b
        out = cls(w)
        zero = b == 0
        out.const = out._sum(w, zero & (a >= 0))
        pos, neg = b > 0, b < 0
        with np.errstate(divide="ignore", invalid="ignore"):
            r = -a / b
        out._add_ray("right", r[pos], out._w(w, pos))
        out._add_ray("left", r[neg], out._w(w, neg))
        return out

    @classmethod
    def product(cls, a1, b1, a2, b2, w=None) -> "_IndicatorSets":
        """``(a1 + b1*eta) * (a2 + b2*eta) >= 0``."""
        out = cls(w)
        z1, z2 = b1 == 0, b2 == 0
        both = z1 & z2
        const_true = both & (((a1 >= 0) & (a2 >= 0)) | ((a1 <= 0) & (a2 <= 0)))
        const_true |= (z1 & ~z2 & (a1 == 0)) | (z2 & ~z1 & (a2 == 0))
        # one factor constant and nonzero: the other factor decides
        for zc, ac, av, bv in ((z1 & ~z2, a1, a2, b2), (z2 & ~z1, a2, a1, b1)):
            sel = zc & (ac != 0)
            sign = np.sign(ac[sel])
            a_eff, b_eff = av[sel] * sign, bv[sel] * sign
            w_sel = out._w(w, sel)
            with np.errstate(divide="ignore", invalid="ignore"):
                r = -a_eff / b_eff
            right = b_eff > 0
            out._add_ray("right", r[right], None if w_sel is None else w_sel[right])
            out._add_ray("left", r[~right], None if w_sel is None else w_sel[~right])
        gen = ~z1 & ~z2
        r1 = -a1[gen] / b1[gen]
        r2 = -a2[gen] / b2[gen]
        lo, hi = np.minimum(r1, r2), np.maximum(r1, r2)
        same = np.sign(b1[gen]) == np.sign(b2[gen])
        w_gen = out._w(w, gen)
        # same-sign slopes: true outside the open interval (lo, hi)
        empty_gap = same & (lo == hi)
        const_true_gen = np.zeros(gen.shape, dtype=bool)
        const_true_gen[np.flatnonzero(gen)[empty_gap]] = True
        out.const = out._sum(w, const_true | const_true_gen)
        keep = same & ~empty_gap
        out._add_interval("coopen", lo[keep], hi[keep], None if w_gen is None else w_gen[keep])
        out._add_interval("closed", lo[~same], hi[~same], None if w_gen is None else w_gen[~same])
        return out

    @staticmethod
    def _cum(values, w):
        order = np.argsort(values, kind="stable")
        v = values[order]
        if w is None:
            cum = np.arange(v.shape[0] + 1, dtype=np.int64)
        else:
            cum = np.concatenate([[0.0], np.cumsum(w[order])])
        return v, cum

    def _add_ray(self, kind, r, w):
        if r.shape[0]:
            v, cum = self._cum(r, w)
            self.parts.append((kind, v, cum, None, None))

    def _add_interval(self, kind, lo, hi, w):
        if lo.shape[0]:
            lv, lcum = self._cum(lo, w)
            hv, hcum = self._cum(hi, w)
            self.parts.append((kind, lv, lcum, hv, hcum))

    def roots(self) -> list:
        out = []
        for kind, v, _, hv, _ in self.parts:
            out.append(v)
            if hv is not None:
                out.append(hv)
        return out

    def count(self, etas: np.ndarray) -> np.ndarray:
        """Total weight of indicators that hold at each of ``etas``."""
        total = np.full(etas.shape, self.const, dtype=np.int64 if self.integer else np.float64)
        for kind, v, cum, hv, hcum in self.parts:
            if kind == "right":  # [r, inf)
                total += cum[np.searchsorted(v, etas, "right")]
            elif kind == "left":  # (-inf, r]
                total += cum[-1] - cum[np.searchsorted(v, etas, "left")]
            elif kind == "closed":  # [lo, hi]
                total += cum[np.searchsorted(v, etas, "right")] - hcum[np.searchsorted(hv, etas, "left")]
            else:  # complement of (lo, hi)
                inside = cum[np.searchsorted(v, etas, "left")] - hcum[np.searchsorted(hv, etas, "right")]
                total += cum[-1] - inside
        return total


@dataclass
class _Superlevel:
    lower: float
    upper: float
    lower_closed: Optional[bool]
    upper_closed: Optional[bool]
    connected: bool
    n_breakpoints: int
    evaluations: int

    @property
    def empty(self) -> bool:
        return math.isnan(self.lower)


def _probe_points(roots: np.ndarray):
    """Outer points, every root and every gap midpoint, in increasing order."""
    if roots.shape[0] == 0:
        return np.array([0.0]), np.array([False])
    k = roots.shape[0]
    pad_lo = max(1.0, abs(roots[0]))
    pad_hi = max(1.0, abs(roots[-1]))
    mids = roots[:-1] + (roots[1:] - roots[:-1]) / 2
    # adjacent floats leave no representable point in between
    ok = (mids > roots[:-1]) & (mids < roots[1:])
    pts = np.empty(2 * k + 1)
    is_root = np.zeros(2 * k + 1, dtype=bool)
    pts[0], pts[-1] = roots[0] - pad_lo, roots[-1] + pad_hi
    pts[1::2] = roots
    is_root[1::2] = True
    pts[2:-1:2] = mids
    keep = np.ones(2 * k + 1, dtype=bool)
    keep[2:-1:2] = ok
    return pts[keep], is_root[keep]


def _superlevel(sets, p_of_counts, alpha: float) -> _Superlevel:
    roots = [r for s in sets for r in s.roots()]
    roots = np.unique(np.concatenate(roots)) if roots else np.empty(0)
    roots = roots[np.isfinite(roots)]
    pts, is_root = _probe_points(roots)
    p = p_of_counts(*[s.count(pts) for s in sets])
    accept = p >= alpha
    n_eval = int(pts.shape[0])
    if not accept.any():
        return _Superlevel(math.nan, math.nan, None, None, True, roots.shape[0], n_eval)
    idx = np.flatnonzero(accept)
    first, last = int(idx[0]), int(idx[-1])
    connected = bool(accept[first:last + 1].all())
    last_pt = pts.shape[0] - 1
    if first == 0 and roots.shape[0] > 0 or pts.shape[0] == 1:
        lower, lower_closed = -math.inf, None
    elif is_root[first]:
        lower, lower_closed = float(pts[first]), True
    else:
        lower, lower_closed = float(pts[first - 1]), False
    if last == last_pt and roots.shape[0] > 0 or pts.shape[0] == 1:
        upper, upper_closed = math.inf, None
    elif is_root[last]:
        upper, upper_closed = float(pts[last]), True
    else:
        upper, upper_closed = float(pts[last + 1]), False
    return _Superlevel(lower, upper, lower_closed, upper_closed, connected, roots.shape[0], n_eval)


def _tail_sets(forms, tail: Tail, w=None) -> list:
    a1, b1, a2, b2 = forms
    if tail is Tail.UPPER:
        return [_IndicatorSets.linear(a1, b1, True, w)]
    if tail is Tail.LOWER:
        return [_IndicatorSets.linear(a1, b1, False, w)]
    if tail is Tail.TWO_SIDED_BONFERRONI:
        return [_IndicatorSets.linear(a1, b1, True, w), _IndicatorSets.linear(a1, b1, False, w)]
    return [_IndicatorSets.product(a1, b1, a2, b2, w)]


def _combine(tail: Tail, ratio):
    if tail is Tail.TWO_SIDED_BONFERRONI:
        return lambda cu, cl: np.minimum(1.0, 2 * np.minimum(ratio(cu), ratio(cl)))
    return ratio


_SIDE_OF_TAIL = {
    Tail.UPPER: "lower",
    Tail.LOWER: "upper",
    Tail.TWO_SIDED_BONFERRONI: "two-sided",
    Tail.TWO_SIDED_ABS: "two-sided",
}
_TAIL_OF = {
    ("lower", "bonferroni"): Tail.UPPER,
    ("lower", "abs"): Tail.UPPER,
    ("upper", "bonferroni"): Tail.LOWER,
    ("upper", "abs"): Tail.LOWER,
    ("two-sided", "bonferroni"): Tail.TWO_SIDED_BONFERRONI,
    ("two-sided", "abs"): Tail.TWO_SIDED_ABS,
}


def _convention(tail: Tail) -> Optional[str]:
    return {Tail.TWO_SIDED_BONFERRONI: "bonferroni", Tail.TWO_SIDED_ABS: "abs"}.get(tail)


def _result(level: _Superlevel, alpha, tail: Tail, method: str, N: int, scale: float = 1.0,
            seed=None) -> ConfidenceResult:
    diags = []
    if level.empty:
        diags.append("empty")
    elif not level.connected:
        diags.append("not_connected")
    return ConfidenceResult(
        level.lower / scale, level.upper / scale, alpha, N=N, seed=seed,
        side=_SIDE_OF_TAIL[tail], convention=_convention(tail),
        evaluations=level.evaluations, diagnostics=tuple(diags),
        lower_closed=level.lower_closed, upper_closed=level.upper_closed, method=method,
    )


# ---------------------------------------------------------------------------
# linear forms of the tail indicators


def _draw_forms(data, t0, adj):
    """``(a1, b1, a2, b2)`` for replicate summaries in data units."""
    if isinstance(data, OneSampleData):
        S, n = data.total, float(data.n)
        return t0 - S, n - adj, t0 + S, -(adj + n)
    D = data.observed_difference
    return t0 - D, adj, t0 + D, adj - 2.0


def _check_data(data):
    if not isinstance(data, (OneSampleData, TwoSampleData)):
        raise InputError(f"expected OneSampleData or TwoSampleData, got {type(data).__name__}")


def breakpoints(data, draws: FrozenDraws) -> np.ndarray:
    """Shifts where some replicate's one-sided indicator can flip.

    Returns a structured array with fields ``eta`` and ``source`` (replicate
    index), sorted by ``eta`` with ties kept in replicate order.
    """
    _check_data(data)
    a1, b1, _, _ = _draw_forms(data, draws.t0, draws.adj)
    src = np.flatnonzero(b1 != 0)
    eta = -a1[src] / b1[src]
    order = np.argsort(eta, kind="stable")
    out = np.empty(src.shape[0], dtype=[("eta", np.float64), ("source", np.int64)])
    out["eta"], out["source"] = eta[order], src[order]
    return out


def breakpoint_scan_interval(data, draws: FrozenDraws, alpha: float,
                             tail=Tail.TWO_SIDED_BONFERRONI) -> ConfidenceResult:
    """Exact ``{eta : p(eta) >= alpha}`` for the plus-one P-value on frozen draws.

    ``tail="upper"`` gives the lower confidence bound ``[L, inf)``,
    ``tail="lower"`` the upper bound, and the two-sided tails an interval.
    Endpoints are breakpoints; ``lower_closed``/``upper_closed`` say whether
    they belong to the set.
    """
    _check_data(data)
    check_alpha(alpha)
    tail = Tail(tail)
    N = len(draws)
    if N > MAX_SCAN_REPLICATES:
        raise TooLargeError(f"{N} replicates exceed the scan limit of {MAX_SCAN_REPLICATES}")
    forms = _draw_forms(data, draws.t0, draws.adj)
    sets = _tail_sets(forms, tail)
    level = _superlevel(sets, _combine(tail, lambda c: (1 + c) / (1 + N)), alpha)
    return _result(level, alpha, tail, "breakpoint_scan", N, seed=draws.seed)


# ---------------------------------------------------------------------------
# full-group enumeration


def _group_size(data) -> int:
    if isinstance(data, OneSampleData):
        return 2**data.n
    return math.comb(data.n, data.m)


def _check_size(data) -> int:
    size = _group_size(data)
    if size > MAX_GROUP_SIZE:
        raise TooLargeError(
            f"full group has {size} elements, above the limit of {MAX_GROUP_SIZE}; "
            "use the Monte Carlo interval instead"
        )
    return size


def _subset_sums(v: np.ndarray):
    """Sums and sizes of all subsets, lexicographic with ``v[0]`` most significant."""
    s = np.zeros(1)
    c = np.zeros(1, dtype=np.int64)
    for value in v[::-1]:
        s = np.concatenate([s, s + value])
        c = np.concatenate([c, c + 1])
    return s, c


def _combination_sums(v: np.ndarray, k: int) -> np.ndarray:
    """Sums of all ``k``-subsets of ``v`` in lexicographic order of index sets."""
    L = v.shape[0]

    @lru_cache(maxsize=None)
    def rec(start: int, r: int) -> np.ndarray:
        if r == 0:
            return np.zeros(1)
        if L - start == r:
            return np.array([float(np.sum(v[start:]))])
        return np.concatenate([v[start] + rec(start + 1, r - 1), rec(start + 1, r)])

    return rec(0, k)


def _swap_blocks(data: TwoSampleData, w: np.ndarray):
    """Yield ``(delta, sB - sA)`` blocks in enumeration order.

    An element moves treated subset ``A`` to control and control subset ``B``
    to treatment with ``|A| = |B| = delta``.  Blocks run over ``delta``
    ascending, then ``A`` and ``B`` lexicographically.
    """
    m = data.m
    wt, wc = w[:m], w[m:]
    for delta in range(min(m, data.n - m) + 1):
        sa = _combination_sums(wt, delta)
        sb = _combination_sums(wc, delta)
        yield delta, (sb[None, :] - sa[:, None]).ravel()


def _unrank_combination(L: int, k: int, rank: int) -> list:
    out, start = [], 0
    for r in range(k, 0, -1):
        while True:
            block = math.comb(L - start - 1, r - 1)
            if rank < block:
                out.append(start)
                start += 1
                break
            rank -= block
            start += 1
    return out


@dataclass(frozen=True)
class FullGroupIndex:
    """All group elements of a shift model with their selection probabilities.

    Elements are stored through the same two summaries as Monte Carlo
    replicates (``t0`` and ``adj``); :meth:`element` recovers the sign vector
    or 0/1 assignment of element ``k``.

    Sign vectors are ordered lexicographically with the first coordinate most
    significant and ``+1`` above ``-1``, so the last element is the identity.
    Assignments are ordered by the number of swapped pairs, then by the
    lexicographic rank of the treated units moved out and the control units
    moved in, so the first element is the observed assignment.
    """

    model: str
    n: int
    m: Optional[int]
    t0: np.ndarray
    adj: np.ndarray
    probs: np.ndarray

    def __len__(self) -> int:
        return self.t0.shape[0]

    @property
    def uniform(self) -> bool:
        return self.probs.strides == (0,)

    def element(self, k: int) -> np.ndarray:
        size = len(self)
        if not 0 <= k < size:
            raise IndexError(f"element index {k} out of range for {size} elements")
        if self.model == "one_sample":
            bits = [(k >> (self.n - 1 - j)) & 1 for j in range(self.n)]
            return np.array([2 * b - 1 for b in bits], dtype=np.int8)
        m, rest = self.m, self.n - self.m
        for delta in range(min(m, rest) + 1):
            nb = math.comb(rest, delta)
            block = math.comb(m, delta) * nb
            if k < block:
                a = _unrank_combination(m, delta, k // nb)
                b = _unrank_combination(rest, delta, k % nb)
                labels = np.zeros(self.n, dtype=np.int8)
                labels[:m] = 1
                labels[a] = 0
                labels[[m + j for j in b]] = 1
                return labels
            k -= block
        raise AssertionError("unreachable")

    def elements(self) -> np.ndarray:
        """All elements as a matrix (one row each); only sensible for small groups."""
        return np.stack([self.element(k) for k in range(len(self))])


def full_group_index(data, probs=None) -> FullGroupIndex:
    """Enumerate the whole group for ``data``.

    ``probs`` optionally assigns a selection probability to each element (in
    enumeration order); they must be positive and sum to one.
    """
    _check_data(data)
    size = _check_size(data)
    if isinstance(data, OneSampleData):
        s, c = _subset_sums(data.x)
        t0 = 2 * s - data.total
        adj = (2 * c - data.n).astype(np.float64)
        model, m = "one_sample", None
    else:
        coef, D = data.coefficient, data.observed_difference
        t0_parts, adj_parts = [], []
        for delta, diff in _swap_blocks(data, data.w):
            t0_parts.append(D + coef * diff)
            adj_parts.append(np.full(diff.shape[0], delta * coef))
        t0, adj = np.concatenate(t0_parts), np.concatenate(adj_parts)
        model, m = "two_sample", data.m
    if probs is None:
        p = np.broadcast_to(np.float64(1.0 / size), (size,))
    else:
        p = np.array(probs, dtype=np.float64).reshape(-1)
        if p.shape[0] != size:
            raise InputError(f"probs must have {size} entries, got {p.shape[0]}")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise InputError("element probabilities must be finite and positive")
        if abs(float(np.sum(p)) - 1.0) > 2.0**-40:
            raise InputError("element probabilities must sum to one")
    for arr in (t0, adj, p):
        arr.setflags(write=False)
    return FullGroupIndex(model, data.n, m, t0, adj, p)


def full_group_pvalue(data, eta: float, tail=Tail.UPPER, index: Optional[FullGroupIndex] = None) -> float:
    """Exact P-value over the full group at shift ``eta``.

    The observed element is part of the group, so the result is never below
    the smallest element probability.
    """
    _check_data(data)
    tail = Tail(tail)
    if index is None:
        index = full_group_index(data)
    expected = "one_sample" if isinstance(data, OneSampleData) else "two_sample"
    if index.model != expected or index.n != data.n or index.m != getattr(data, "m", None):
        raise ContractError("index was built for different data")

    def weight(mask):
        if index.uniform:
            return int(np.count_nonzero(mask)) / len(index)
        return min(1.0, float(np.sum(index.probs[mask])))

    if isinstance(data, OneSampleData):
        t_obs, t_reps = data.observed_stat(eta), index.t0 - eta * index.adj
    else:
        t_obs, t_reps = data.observed_difference, index.t0 + eta * index.adj
    if tail is Tail.UPPER:
        return weight(t_reps >= t_obs)
    if tail is Tail.LOWER:
        return weight(t_reps <= t_obs)
    if tail is Tail.TWO_SIDED_BONFERRONI:
        return min(1.0, 2 * min(weight(t_reps >= t_obs), weight(t_reps <= t_obs)))
    if isinstance(data, TwoSampleData):
        return weight(np.abs(t_reps - eta) >= abs(t_obs - eta))
    return weight(np.abs(t_reps) >= abs(t_obs))


def _integer_scale(values: np.ndarray):
    """Smallest power of ten turning ``values`` into exact integers, if any."""
    for k in range(_MAX_DECIMALS + 1):
        scaled = values * 10.0**k
        rounded = np.round(scaled)
        if np.all(np.abs(scaled - rounded) <= 1e-9 * np.maximum(1.0, np.abs(scaled))):
            bound = 4.0 * values.shape[0] * float(np.sum(np.abs(rounded)))
            if bound < _EXACT_LIMIT:
                return 10.0**k, rounded
            return None
    return None


def _group_forms(data):
    """Linear forms for every group element, in exact integer arithmetic when possible.

    Forms are rescaled by positive constants, which leaves indicator signs
    and roots unchanged.  Returns ``(forms, scale)``; roots are in units of
    ``1/scale``.
    """
    values = data.x if isinstance(data, OneSampleData) else data.w
    found = _integer_scale(values)
    scale, v = found if found is not None else (1.0, values)
    if isinstance(data, OneSampleData):
        n = data.n
        s, c = _subset_sums(v)
        total = float(np.sum(v))
        c = c.astype(np.float64)
        # t0 - S = 2(s - total), n - adj = 2(n - c), t0 + S = 2s, -(adj + n) = -2c
        return (s - total, n - c, s, -c), scale
    n, m = data.n, data.m
    k = n - m
    base = 2.0 * (k * float(np.sum(v[:m])) - m * float(np.sum(v[m:])))
    a1, b1, a2, b2 = [], [], [], []
    for delta, diff in _swap_blocks(data, v):
        a1.append(diff)
        b1.append(np.full(diff.shape[0], float(delta)))
        a2.append(base + n * diff)
        b2.append(np.full(diff.shape[0], float(n * delta - 2 * m * k)))
    return tuple(np.concatenate(f) for f in (a1, b1, a2, b2)), scale


def full_group_interval(data, alpha: float, convention: str = "bonferroni",
                        side: str = "two-sided") -> ConfidenceResult:
    """Exact confidence set from the full-group test, by breakpoint analysis.

    Parameters
    ----------
    data : OneSampleData or TwoSampleData
    alpha : float
        Significance level of the whole interval.
    convention : {"bonferroni", "abs"}
        Two-sided P-value: twice the smaller one-sided P-value, or the
        absolute (centered) statistic.
    side : {"two-sided", "lower", "upper"}
        ``"lower"`` returns ``[L, inf)`` from the upper-tail test.

    When the data are decimals with at most six places the computation runs
    on scaled integers, so tied breakpoints are detected exactly.
    """
    _check_data(data)
    check_alpha(alpha)
    try:
        tail = _TAIL_OF[(side, convention)]
    except KeyError:
        raise InputError(f"unknown side/convention {side!r}/{convention!r}") from None
    size = _check_size(data)
    forms, scale = _group_forms(data)
    sets = _tail_sets(forms, tail)
    level = _superlevel(sets, _combine(tail, lambda c: c / size), alpha)
    return _result(level, alpha, tail, "full_group", size, scale=scale)
