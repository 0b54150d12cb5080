from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mcci.exceptions import ContractError, DegenerateWeightsError, InputError, PreconditionError
from mcci.pvalues import (
    FrozenDraws,
    PValueFn,
    Shape,
    Tail,
    p_fixed_subset,
    p_plus_one,
    p_weighted,
    p_weighted_assignments,
    two_sided,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)
stats = st.lists(st.integers(-5, 5).map(float), max_size=40)


class TestPlusOne:
    def test_no_replicates(self):
        assert p_plus_one(0.0, []) == 1.0

    def test_nothing_as_large(self):
        assert p_plus_one(5, [1, 2, 3, 4]) == pytest.approx(1 / 5)

    def test_ties_count(self):
        assert p_plus_one(3, [3, 1, 4, 3]) == pytest.approx(0.8)

    def test_lower_tail(self):
        assert p_plus_one(3, [3, 1, 4, 3], Tail.LOWER) == pytest.approx(4 / 5)
        assert p_plus_one(0, [3, 1, 4, 3], "lower") == pytest.approx(1 / 5)

    def test_rejects_two_sided_tail(self):
        with pytest.raises(ContractError):
            p_plus_one(1, [1, 2], Tail.TWO_SIDED_ABS)

    def test_non_finite(self):
        with pytest.raises(InputError):
            p_plus_one(float("nan"), [1])
        with pytest.raises(InputError):
            p_plus_one(1.0, [np.inf])

    @given(finite, stats)
    def test_floor(self, t, reps):
        assert 1 / (len(reps) + 1) <= p_plus_one(t, reps) <= 1

    @given(st.integers(-6, 6).map(float), st.integers(0, 3).map(float), stats)
    def test_monotone_in_observed(self, t, dt, reps):
        assert p_plus_one(t + dt, reps) <= p_plus_one(t, reps)


class TestWeighted:
    def test_zero_weights(self):
        assert p_weighted(1.0, [0, 5], 1.0, [0, 0]) == pytest.approx(1 / 3)
        assert p_weighted(1.0, [0, 5], 1.0, [0, 0], variant="self_normalized") == 1.0

    def test_no_replicates(self):
        assert p_weighted(1.0, [], 1.0, []) == 1.0
        assert p_weighted(1.0, [], 1.0, [], variant="self_normalized") == 1.0

    def test_all_zero_self_normalized(self):
        with pytest.raises(DegenerateWeightsError):
            p_weighted(1.0, [2.0], 0.0, [0.0], variant="self_normalized")

    def test_clipped_at_one(self):
        assert p_weighted(0.0, [1.0, 2.0], 5.0, [5.0, 5.0]) == 1.0

    def test_bad_weights(self):
        with pytest.raises(InputError):
            p_weighted(0.0, [1.0], 1.0, [-1.0])
        with pytest.raises(InputError):
            p_weighted(0.0, [1.0, 2.0], 1.0, [1.0])
        with pytest.raises(ValueError):
            p_weighted(0.0, [1.0], 1.0, [1.0], variant="other")

    @given(finite, stats, st.sampled_from(["upper", "lower"]))
    def test_unit_weights_reduce_to_plus_one(self, t, reps, tail):
        ones = np.ones(len(reps))
        expected = p_plus_one(t, reps, tail)
        assert p_weighted(t, reps, 1.0, ones, "fixed_denominator", tail) == expected
        assert p_weighted(t, reps, 1.0, ones, "self_normalized", tail) == expected


class TestFixedSubset:
    def test_hand_counts(self):
        assert p_fixed_subset(2, [1, 2, 3, 4]) == pytest.approx(3 / 4)
        assert p_fixed_subset(10, [1, 2, 3, 4]) == 0.0

    def test_identity_only(self):
        assert p_fixed_subset(1.5, [1.5]) == 1.0

    def test_empty(self):
        with pytest.raises(PreconditionError):
            p_fixed_subset(1.0, [])


class TestWeightedAssignments:
    def test_hand_example(self):
        assert p_weighted_assignments(3, [1, 5], [0.25, 0.25], 0.5) == pytest.approx(0.75)

    def test_no_replicates(self):
        assert p_weighted_assignments(3, [], [], 0.7) == 1.0

    def test_zero_probability_rejected(self):
        with pytest.raises(InputError):
            p_weighted_assignments(3, [1], [0.0], 0.5)

    @given(finite, stats)
    def test_equal_probs_match_plus_one(self, t, reps):
        p = np.full(len(reps), 0.1)
        assert p_weighted_assignments(t, reps, p, 0.1) == pytest.approx(p_plus_one(t, reps), rel=1e-12)


class TestFrozenDraws:
    def test_immutable(self):
        d = FrozenDraws([1.0, 2.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            d.t0[0] = 5.0
        with pytest.raises(Exception):
            d.t0 = np.zeros(2)

    def test_input_is_copied(self):
        t0 = np.array([1.0, 2.0])
        d = FrozenDraws(t0, [0.0, 1.0])
        t0[0] = 99.0
        assert d.t0[0] == 1.0

    def test_access(self):
        d = FrozenDraws([1.0, 2.0], [0.0, 1.0])
        assert len(d) == d.n_replicates == 2
        assert d[1].t0 == 2.0 and d[1].adj == 1.0
        assert [r.t0 for r in d] == [1.0, 2.0]

    def test_validation(self):
        with pytest.raises(InputError):
            FrozenDraws([1.0], [1.0, 2.0])
        with pytest.raises(InputError):
            FrozenDraws([1.0], [1.0], weights=[1.0])
        with pytest.raises(InputError):
            FrozenDraws([1.0], [1.0], weights=[-1.0], weight_obs=1.0)


def _const(v, shape):
    return PValueFn(lambda eta: v, shape)


class TestTwoSided:
    def test_constant_one(self):
        p = two_sided(_const(1.0, Shape.NONDECREASING), _const(1.0, Shape.NONINCREASING))
        assert p(0.0) == 1.0
        assert p.shape is Shape.QUASICONCAVE

    def test_twice_the_smaller(self):
        p = two_sided(_const(0.02, Shape.NONDECREASING), _const(0.5, Shape.NONINCREASING))
        assert p(3.0) == pytest.approx(0.04)

    def test_shape_mismatch(self):
        with pytest.raises(ContractError):
            two_sided(_const(1.0, Shape.NONINCREASING), _const(1.0, Shape.NONINCREASING))
        with pytest.raises(ContractError):
            two_sided(_const(1.0, Shape.NONDECREASING), _const(1.0, Shape.NONDECREASING))

    def test_unknown_shapes_stay_unknown(self):
        p = two_sided(_const(1.0, Shape.UNKNOWN), _const(1.0, Shape.NONINCREASING))
        assert p.shape is Shape.UNKNOWN

    def test_floor_combines(self):
        up = PValueFn(lambda e: 1.0, Shape.NONDECREASING, floor=0.01)
        lo = PValueFn(lambda e: 1.0, Shape.NONINCREASING, floor=0.01)
        assert two_sided(up, lo).floor == pytest.approx(0.02)

    def test_purity(self):
        up = PValueFn(lambda e: min(1.0, max(0.0, e)), Shape.NONDECREASING)
        lo = PValueFn(lambda e: min(1.0, max(0.0, 1 - e)), Shape.NONINCREASING)
        p = two_sided(up, lo)
        assert p(0.3) == p(0.3)
        assert p.grid([0.3, 0.3]).tolist() == [p(0.3)] * 2
