from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcci.exceptions import ContractError, EmptyConfidenceSetError, PreconditionError
from mcci.invert import (
    ConfidenceResult,
    SearchConfig,
    lower_bound,
    one_sided_interval,
    quasiconcave_interval,
    two_sided_interval,
    upper_bound,
)
from mcci.oracle import breakpoint_scan_interval
from mcci.pvalues import PValueFn, Shape, Tail
from mcci.rng import SeededGenerator
from mcci.shift_models import OneSampleData, make_pvalue_fn, one_sample_freeze, two_sample_freeze

E = 1e-6


def step_up(at, lo=0.0):
    return PValueFn(lambda eta: 1.0 if eta >= at else lo, Shape.NONDECREASING)


def step_down(at, lo=0.0):
    return PValueFn(lambda eta: 1.0 if eta <= at else lo, Shape.NONINCREASING)


class TestSearchConfig:
    @pytest.mark.parametrize("kwargs", [
        {"alpha": 0.0}, {"alpha": 1.0}, {"alpha": 0.1, "e": 0.0},
        {"alpha": 0.1, "delta0": -1.0}, {"alpha": 0.1, "eta0": math.inf},
        {"alpha": 0.1, "max_doublings": -1},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(PreconditionError):
            SearchConfig(**kwargs)


class TestLowerBound:
    def test_step_function(self):
        a = lower_bound(step_up(3.0), SearchConfig(0.05, e=E))
        assert 3 - E <= a < 3

    def test_started_inside_the_set(self):
        a = lower_bound(step_up(-7.25), SearchConfig(0.05, e=E, eta0=10.0))
        assert -7.25 - E <= a < -7.25

    def test_never_rejects(self):
        a, info = lower_bound(PValueFn(lambda e: 1.0, Shape.NONDECREASING),
                              SearchConfig(0.05, max_doublings=60), full_output=True)
        assert a == -math.inf and info["status"] == "unbounded"

    def test_never_accepts(self):
        a, info = lower_bound(PValueFn(lambda e: 0.0, Shape.NONDECREASING),
                              SearchConfig(0.05, max_doublings=10), full_output=True)
        assert a == math.inf and info["status"] == "empty"

    def test_returned_point_is_rejected(self):
        p = step_up(1 / 3, lo=0.01)
        a = lower_bound(p, SearchConfig(0.05, e=1e-9))
        assert p(a) < 0.05

    def test_floor_guard(self):
        p = PValueFn(lambda e: 1.0, Shape.NONDECREASING, floor=1 / 101)
        with pytest.raises(PreconditionError, match="N/\\(N\\+1\\)"):
            lower_bound(p, SearchConfig(0.005))

    def test_shape_contract(self):
        with pytest.raises(ContractError):
            lower_bound(step_down(1.0), SearchConfig(0.05))

    def test_bisection_step_count(self):
        p = step_up(0.123456)
        cfg = SearchConfig(0.05, e=1e-8, delta0=1.0)
        _, info = lower_bound(p, cfg, full_output=True)
        # one evaluation at eta0, one bracketing step, then the bisection
        assert info["evaluations"] - 2 <= math.ceil(math.log2(1.0 / 1e-8))


class TestUpperBound:
    def test_step_function(self):
        b = upper_bound(step_down(3.0), SearchConfig(0.05, e=E))
        assert 3 < b <= 3 + E

    def test_never_rejects(self):
        assert upper_bound(PValueFn(lambda e: 1.0, Shape.NONINCREASING), SearchConfig(0.05)) == math.inf

    def test_resolution_limit(self):
        # tolerance below float spacing still terminates
        b, info = upper_bound(step_down(1e8), SearchConfig(0.05, e=1e-12, eta0=1e8 - 1),
                              full_output=True)
        assert b > 1e8 and "resolution_limited" in info["notes"]


class TestIntervals:
    def test_tent(self):
        tent = PValueFn(lambda e: max(0.0, 1 - abs(e)), Shape.QUASICONCAVE)
        r = quasiconcave_interval(tent, SearchConfig(0.5, e=E))
        assert -0.5 - E <= r.lower <= -0.5 and 0.5 <= r.upper <= 0.5 + E
        assert isinstance(r, ConfidenceResult) and r.side == "two-sided"

    def test_constant_one_is_unbounded(self):
        r = two_sided_interval(PValueFn(lambda e: 1.0, Shape.NONDECREASING),
                               PValueFn(lambda e: 1.0, Shape.NONINCREASING), SearchConfig(0.05))
        assert r.interval == (-math.inf, math.inf)
        assert "lower_unbounded" in r.diagnostics and "upper_unbounded" in r.diagnostics

    def test_rejected_start(self):
        tent = PValueFn(lambda e: max(0.0, 1 - abs(e)), Shape.QUASICONCAVE)
        with pytest.raises(EmptyConfidenceSetError):
            quasiconcave_interval(tent, SearchConfig(0.5, eta0=3.0))

    def test_one_sided_wrappers(self):
        r = one_sided_interval(step_up(2.0), SearchConfig(0.05, e=E), "lower")
        assert r.upper == math.inf and 2 - E <= r.lower < 2
        r = one_sided_interval(step_down(2.0), SearchConfig(0.05, e=E), "upper")
        assert r.lower == -math.inf and 2 < r.upper <= 2 + E
        r = one_sided_interval(PValueFn(lambda e: 0.0, Shape.NONDECREASING),
                               SearchConfig(0.05, max_doublings=5), "lower")
        assert math.isnan(r.lower) and "lower_empty" in r.diagnostics
        with pytest.raises(ValueError):
            one_sided_interval(step_up(2.0), SearchConfig(0.05), "both")

    def test_unknown_shape_is_flagged(self):
        tent = PValueFn(lambda e: max(0.0, 1 - abs(e)), Shape.UNKNOWN)
        r = quasiconcave_interval(tent, SearchConfig(0.5, e=E))
        assert "shape_unverified" in r.diagnostics

    def test_as_dict(self):
        tent = PValueFn(lambda e: max(0.0, 1 - abs(e)), Shape.QUASICONCAVE)
        d = quasiconcave_interval(tent, SearchConfig(0.5, e=E)).as_dict()
        assert d["alpha"] == 0.5 and d["method"] == "bisection"


def _slack(*values):
    return 64 * np.spacing(max([1.0] + [abs(v) for v in values if math.isfinite(v)]))


def _check_against_scan(bis, scan, e):
    for b, s, sign in ((bis.lower, scan.lower, -1), (bis.upper, scan.upper, 1)):
        if math.isinf(s):
            assert b == s
            continue
        # conservative: outside the exact set, by at most e
        dist = sign * (b - s)
        assert -_slack(b, s) <= dist <= e + _slack(b, s)


class TestAgainstBreakpointScan:
    def test_darwin_tails(self, darwin):
        draws = one_sample_freeze(darwin, 10_000, SeededGenerator("tails"))
        cfg = SearchConfig(0.025, e=1e-8, delta0=142.0, eta0=float(np.mean(darwin.x)))
        lo = lower_bound(make_pvalue_fn(darwin, draws, Tail.UPPER), cfg)
        up = upper_bound(make_pvalue_fn(darwin, draws, Tail.LOWER), cfg)
        s_lo = breakpoint_scan_interval(darwin, draws, 0.025, Tail.UPPER)
        s_up = breakpoint_scan_interval(darwin, draws, 0.025, Tail.LOWER)
        assert -_slack(lo) <= s_lo.lower - lo <= 1e-8 + _slack(lo)
        assert -_slack(up) <= up - s_up.upper <= 1e-8 + _slack(up)

    def test_sleep_two_sided(self, sleep):
        draws = two_sample_freeze(sleep, 10_000, SeededGenerator("sleep-scan"))
        p = make_pvalue_fn(sleep, draws, Tail.TWO_SIDED_BONFERRONI)
        cfg = SearchConfig(0.05, e=1e-8, delta0=8.9, eta0=sleep.observed_difference)
        _check_against_scan(quasiconcave_interval(p, cfg),
                            breakpoint_scan_interval(sleep, draws, 0.05), 1e-8)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(3, 10), st.integers(30, 300), st.sampled_from([0.05, 0.1, 0.2]), st.data())
    def test_random_one_sample(self, n, N, alpha, data):
        x = np.array(data.draw(st.lists(st.integers(-20, 20), min_size=n, max_size=n)), dtype=float)
        d = OneSampleData(x)
        draws = one_sample_freeze(d, N, SeededGenerator(data.draw(st.text(max_size=4))))
        up = make_pvalue_fn(d, draws, Tail.UPPER)
        cfg = SearchConfig(alpha, e=1e-7, delta0=1.0, eta0=float(np.mean(x)))
        r = one_sided_interval(up, cfg, "lower")
        s = breakpoint_scan_interval(d, draws, alpha, Tail.UPPER)
        if math.isnan(s.lower) or math.isinf(s.lower):
            assert r.lower == s.lower or math.isnan(r.lower) and math.isnan(s.lower)
        else:
            assert -_slack(r.lower) <= s.lower - r.lower <= 1e-7 + _slack(r.lower)


def test_nested_in_alpha(sleep):
    draws = two_sample_freeze(sleep, 2000, SeededGenerator("nest"))
    p = make_pvalue_fn(sleep, draws, Tail.TWO_SIDED_BONFERRONI)
    out = []
    for alpha in (0.01, 0.05, 0.1, 0.3):
        out.append(quasiconcave_interval(p, SearchConfig(alpha, e=1e-8, delta0=8.9,
                                                         eta0=sleep.observed_difference)))
    for wide, narrow in zip(out, out[1:]):
        assert wide.lower <= narrow.lower + 1e-8 and narrow.upper <= wide.upper + 1e-8
