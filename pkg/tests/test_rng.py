from __future__ import annotations

import hashlib
import itertools
import math

import numpy as np
import pytest
from cryptography.hazmat.primitives import hashes

from mcci.rng import (
    FastGenerator,
    SeededGenerator,
    assignment_matrix,
    coerce_seed,
    derive_seed,
    make_generator,
    next_bytes,
    random_assignment,
    random_signs,
    sign_matrix,
    uniform_below,
)

# SHA256(b"abc" || 0x0000000000000000), computed with an independent implementation
ABC_BLOCK0 = "4b5c6fd314d0d83d29a1e129033092289834a2b50da22f2c0f74177dc3e7525e"


def _independent_sha256(data: bytes) -> bytes:
    h = hashes.Hash(hashes.SHA256())
    h.update(data)
    return h.finalize()


class TestSeeds:
    def test_string_is_utf8(self):
        assert coerce_seed("abc") == b"abc"
        assert coerce_seed("é") == "é".encode("utf-8")

    def test_hex_prefix(self):
        assert coerce_seed("hex:00ff") == b"\x00\xff"

    def test_int_uses_decimal_text(self):
        assert coerce_seed(42) == b"42"

    def test_rejects_bool_and_float(self):
        with pytest.raises(TypeError):
            coerce_seed(True)
        with pytest.raises(TypeError):
            coerce_seed(1.5)


class TestNextBytes:
    def test_zero_request_leaves_state(self):
        gen = SeededGenerator("s")
        assert next_bytes(gen, 0) == b""
        assert gen.counter == 0

    def test_first_block_matches_independent_sha256(self):
        out = next_bytes(SeededGenerator("abc"), 32)
        assert out.hex() == ABC_BLOCK0
        assert out == _independent_sha256(b"abc" + bytes(8))

    def test_same_seed_same_stream(self):
        assert next_bytes(SeededGenerator("s"), 32) == next_bytes(SeededGenerator("s"), 32)

    def test_blocks_are_consumed_in_order(self):
        seed = b"layout"
        expected = b"".join(_independent_sha256(seed + i.to_bytes(8, "big")) for i in range(4))
        gen = SeededGenerator(seed)
        got = b"".join(next_bytes(gen, k) for k in (5, 27, 1, 40, 0, 55))
        assert got == expected
        assert gen.counter == 4

    def test_negative_request_rejected(self):
        with pytest.raises(ValueError):
            next_bytes(SeededGenerator("s"), -1)

    def test_spawn_appends_index(self):
        child = SeededGenerator("p").spawn(3)
        assert child.seed == b"p" + (3).to_bytes(8, "big")

    def test_fast_generator_is_deterministic(self):
        assert FastGenerator("x").next_bytes(16) == FastGenerator("x").next_bytes(16)
        assert FastGenerator("x").next_bytes(16) != FastGenerator("y").next_bytes(16)

    def test_unknown_generator(self):
        with pytest.raises(ValueError):
            make_generator("s", "mt19937")

    def test_derive_seed(self):
        expected = hashlib.sha256(b"base" + b"lab" + (7).to_bytes(8, "big")).digest()
        assert derive_seed("base", 7, b"lab") == expected


class TestUniformBelow:
    def test_bound_one_consumes_a_byte(self):
        gen = SeededGenerator("s")
        assert uniform_below(gen, 1) == 0
        assert gen._pos == 1

    def test_power_of_two_64_never_rejects(self):
        gen = SeededGenerator("s")
        expected = int.from_bytes(SeededGenerator("s").next_bytes(8), "big")
        assert uniform_below(gen, 2**64) == expected
        assert gen._pos == 8

    def test_rejection_rule(self):
        # bound 200 uses one byte and rejects 200..255
        gen = SeededGenerator("rej")
        raw = SeededGenerator("rej").next_bytes(64)
        accepted = [b for b in raw if b < 200]
        assert [uniform_below(gen, 200) for _ in range(5)] == accepted[:5]

    def test_invalid_bound(self):
        with pytest.raises(ValueError):
            uniform_below(SeededGenerator("s"), 0)

    def test_die_faces_within_four_se(self):
        gen = SeededGenerator("die")
        counts = np.bincount([uniform_below(gen, 6) for _ in range(60_000)], minlength=6)
        se = math.sqrt(60_000 * (1 / 6) * (5 / 6))
        assert np.all(np.abs(counts - 10_000) < 4 * se)

    def test_no_modulo_bias_full_period(self):
        # every byte value is a possible draw for bound 3; accepted bytes map evenly
        limit = 256 - 256 % 3
        counts = np.bincount([b % 3 for b in range(limit)], minlength=3)
        assert len(set(counts)) == 1


class TestSigns:
    def test_values_and_length(self):
        s = random_signs(SeededGenerator("s"), 15)
        assert s.shape == (15,)
        assert set(np.unique(s)) <= {-1, 1}

    def test_bit_layout(self):
        raw = SeededGenerator("bits").next_bytes(2)
        bits = [(raw[i // 8] >> (7 - i % 8)) & 1 for i in range(11)]
        expected = [1 if b else -1 for b in bits]
        assert random_signs(SeededGenerator("bits"), 11).tolist() == expected

    def test_n_one_takes_both_values(self):
        seen = {int(random_signs(SeededGenerator(f"seed{i}"), 1)[0]) for i in range(40)}
        assert seen == {-1, 1}

    def test_repeatable(self):
        a = random_signs(SeededGenerator("r"), 15)
        b = random_signs(SeededGenerator("r"), 15)
        assert np.array_equal(a, b)

    def test_sign_sum_mean_near_zero(self):
        S = sign_matrix(SeededGenerator("clt"), 10_000, 15).sum(axis=1)
        se = math.sqrt(15 / 10_000)
        assert abs(S.mean()) < 4 * se

    def test_small_n_uniform(self):
        rows = sign_matrix(SeededGenerator("chi"), 32_000, 3)
        codes = ((rows + 1) // 2) @ np.array([4, 2, 1])
        counts = np.bincount(codes, minlength=8)
        se = math.sqrt(32_000 * (1 / 8) * (7 / 8))
        assert np.all(np.abs(counts - 4000) < 4 * se)

    @pytest.mark.parametrize("n", [1, 7, 8, 9, 300])
    def test_matrix_rows_equal_spawned_streams(self, n):
        gen = SeededGenerator("mat")
        M = sign_matrix(gen, 20, n)
        for j in (0, 5, 19):
            assert np.array_equal(M[j], random_signs(gen.spawn(j), n))

    @pytest.mark.parametrize("kind", ["sha256", "pcg64"])
    def test_thread_count_invariance(self, kind):
        a = sign_matrix(make_generator("t", kind), 3000, 13, threads=1)
        b = sign_matrix(make_generator("t", kind), 3000, 13, threads=4)
        assert np.array_equal(a, b)


class TestAssignments:
    def test_exactly_m_ones(self):
        for seed in range(20):
            a = random_assignment(SeededGenerator(seed), 9, 4)
            assert a.sum() == 4 and a.shape == (9,)

    @pytest.mark.parametrize("n,m", [(5, 5), (5, 0), (1, 1)])
    def test_bad_sizes(self, n, m):
        with pytest.raises(ValueError):
            random_assignment(SeededGenerator("s"), n, m)

    def test_two_units(self):
        firsts = [int(random_assignment(SeededGenerator(f"p{i}"), 2, 1)[0]) for i in range(2000)]
        se = math.sqrt(0.25 / 2000)
        assert abs(np.mean(firsts) - 0.5) < 4 * se

    def test_all_six_assignments_uniform(self):
        rows = assignment_matrix(SeededGenerator("six"), 60_000, 4, 2)
        codes = rows @ np.array([8, 4, 2, 1])
        valid = sorted(sum(1 << (3 - i) for i in c) for c in itertools.combinations(range(4), 2))
        counts = {c: int(np.count_nonzero(codes == c)) for c in valid}
        assert sum(counts.values()) == 60_000
        se = math.sqrt(60_000 * (1 / 6) * (5 / 6))
        assert all(abs(v - 10_000) < 4 * se for v in counts.values())

    def test_large_m_uses_complement(self):
        # m > n/2 selects the control group, still uniform and exact size
        rows = assignment_matrix(SeededGenerator("big"), 500, 7, 5)
        assert np.all(rows.sum(axis=1) == 5)

    def test_matrix_rows_equal_spawned_streams(self):
        gen = SeededGenerator("am")
        M = assignment_matrix(gen, 10, 11, 4)
        for j in range(10):
            assert np.array_equal(M[j], random_assignment(gen.spawn(j), 11, 4))

    def test_fast_generator_rows(self):
        M = assignment_matrix(FastGenerator("f"), 5000, 10, 3, threads=2)
        assert np.all(M.sum(axis=1) == 3)
        freq = M.mean(axis=0)
        assert np.all(np.abs(freq - 0.3) < 4 * math.sqrt(0.21 / 5000))
        assert np.array_equal(M, assignment_matrix(FastGenerator("f"), 5000, 10, 3, threads=1))
