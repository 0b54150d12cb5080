"""Reproducible pseudo-random sources and unbiased sampling primitives.

The default source is SHA-256 in counter mode: output block ``i`` is
``SHA256(seed || uint64_be(i))`` and blocks are consumed in order.  The byte
layout is fixed so the stream is identical on every platform.

Replicate-level parallelism never shares a stream.  Replicate ``j`` draws from
``gen.spawn(j)``, a child whose seed is ``seed || uint64_be(j)``, so results do
not depend on how replicates are split across workers.

A PCG64-backed :class:`FastGenerator` is available for large problems where
hashing dominates the run time.  It is not bit-compatible with the default.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Union

import numpy as np

SeedLike = Union[str, bytes, bytearray, int]

BLOCK_SIZE = 32
CHUNK_SIZE = 1024
_COUNTER_LIMIT = 2**64


def coerce_seed(seed: SeedLike) -> bytes:
    """Turn a user seed into bytes.

    Strings are UTF-8 encoded, except that a ``hex:`` prefix marks the rest
    as hexadecimal bytes.  Integers are encoded through their decimal string.
    """
    if isinstance(seed, (bytes, bytearray)):
        return bytes(seed)
    if isinstance(seed, bool):
        raise TypeError("seed must be str, bytes or int, not bool")
    if isinstance(seed, int):
        return str(seed).encode("ascii")
    if isinstance(seed, str):
        if seed.startswith("hex:"):
            return bytes.fromhex(seed[4:])
        return seed.encode("utf-8")
    raise TypeError(f"unsupported seed type {type(seed).__name__}")


class SeededGenerator:
    """SHA-256 counter-mode byte stream.

    Parameters
    ----------
    seed : str, bytes or int
        See :func:`coerce_seed`.
    """

    kind = "sha256"

    def __init__(self, seed: SeedLike):
        self.seed = coerce_seed(seed)
        self.counter = 0
        self._buf = b""
        self._pos = 0

    def __repr__(self) -> str:
        return f"SeededGenerator(seed={self.seed!r}, counter={self.counter})"

    def _block(self) -> bytes:
        if self.counter >= _COUNTER_LIMIT:
            raise OverflowError("SHA-256 counter exhausted")
        out = hashlib.sha256(self.seed + self.counter.to_bytes(8, "big")).digest()
        self.counter += 1
        return out

    def next_bytes(self, k: int) -> bytes:
        if k < 0:
            raise ValueError(f"byte count must be nonnegative, got {k}")
        avail = len(self._buf) - self._pos
        if k <= avail:
            out = self._buf[self._pos:self._pos + k]
            self._pos += k
            return out
        parts = [self._buf[self._pos:]]
        need = k - avail
        while need > BLOCK_SIZE:
            parts.append(self._block())
            need -= BLOCK_SIZE
        self._buf = self._block()
        self._pos = need
        parts.append(self._buf[:need])
        return b"".join(parts)

    def spawn(self, j: int) -> "SeededGenerator":
        """Independent child stream keyed by a replicate index."""
        return SeededGenerator(self.seed + int(j).to_bytes(8, "big"))


class FastGenerator:
    """PCG64 stream seeded from a SHA-256 digest of the seed.

    ``spawn(k)`` keys a child by *chunk* index; the vectorized samplers below
    hand each chunk of :data:`CHUNK_SIZE` replicates its own child.
    """

    kind = "pcg64"

    def __init__(self, seed: SeedLike):
        self.seed = coerce_seed(seed)
        entropy = int.from_bytes(hashlib.sha256(b"pcg64:" + self.seed).digest(), "big")
        self.numpy = np.random.Generator(np.random.PCG64(entropy))

    def __repr__(self) -> str:
        return f"FastGenerator(seed={self.seed!r})"

    def next_bytes(self, k: int) -> bytes:
        if k < 0:
            raise ValueError(f"byte count must be nonnegative, got {k}")
        return self.numpy.bytes(k) if k else b""

    def spawn(self, j: int) -> "FastGenerator":
        return FastGenerator(self.seed + int(j).to_bytes(8, "big"))


Generator = Union[SeededGenerator, FastGenerator]

GENERATORS = {"sha256": SeededGenerator, "pcg64": FastGenerator}


def make_generator(seed: SeedLike, kind: str = "sha256") -> Generator:
    try:
        cls = GENERATORS[kind]
    except KeyError:
        raise ValueError(f"unknown generator {kind!r}; choose from {sorted(GENERATORS)}") from None
    return cls(seed)


def derive_seed(seed: SeedLike, index: int, label: bytes = b"") -> bytes:
    """Hash ``seed || label || uint64_be(index)`` into a fresh 32-byte seed."""
    return hashlib.sha256(coerce_seed(seed) + label + int(index).to_bytes(8, "big")).digest()


def next_bytes(gen: Generator, k: int) -> bytes:
    return gen.next_bytes(k)


def uniform_below(gen: Generator, bound: int) -> int:
    """Uniform integer in ``[0, bound)`` by rejection sampling.

    Draws the fewest whole bytes whose range covers ``bound`` (at least one)
    and rejects values at or above the largest multiple of ``bound`` that
    fits, so there is no modulo bias.
    """
    if bound < 1:
        raise ValueError(f"bound must be >= 1, got {bound}")
    nbytes = max(1, ((bound - 1).bit_length() + 7) // 8)
    span = 1 << (8 * nbytes)
    limit = span - span % bound
    while True:
        v = int.from_bytes(gen.next_bytes(nbytes), "big")
        if v < limit:
            return v % bound


def random_signs(gen: Generator, n: int) -> np.ndarray:
    """Vector of ``n`` independent fair signs (int8, values -1/+1).

    Uses ``ceil(n / 8)`` bytes, most significant bit first; bit 1 is +1.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    raw = np.frombuffer(gen.next_bytes((n + 7) // 8), dtype=np.uint8)
    bits = np.unpackbits(raw)[:n].astype(np.int8)
    return 2 * bits - 1


def _check_mn(n: int, m: int) -> None:
    if not (0 < m < n):
        raise ValueError(f"need 0 < m < n, got n={n}, m={m}")


def random_assignment(gen: Generator, n: int, m: int) -> np.ndarray:
    """Uniformly random 0/1 vector with exactly ``m`` ones.

    A partial Fisher-Yates shuffle selects the smaller of the two groups, so
    ``min(m, n - m)`` calls to :func:`uniform_below` are made.
    """
    _check_mn(n, m)
    k = min(m, n - m)
    idx = list(range(n))
    for i in range(k):
        j = i + uniform_below(gen, n - i)
        idx[i], idx[j] = idx[j], idx[i]
    if k == m:
        labels = np.zeros(n, dtype=np.int8)
        labels[idx[:k]] = 1
    else:
        labels = np.ones(n, dtype=np.int8)
        labels[idx[:k]] = 0
    return labels


def _chunks(total: int) -> list[tuple[int, int, int]]:
    return [(c, lo, min(lo + CHUNK_SIZE, total)) for c, lo in enumerate(range(0, total, CHUNK_SIZE))]


def _run_chunks(fn: Callable[[int, int, int], np.ndarray], total: int, width: int,
                dtype, threads: int | None) -> np.ndarray:
    chunks = _chunks(total)
    if not chunks:
        return np.zeros((0, width), dtype=dtype)
    workers = threads or os.cpu_count() or 1
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: fn(*c), chunks))
    else:
        parts = [fn(*c) for c in chunks]
    return np.concatenate(parts, axis=0)


def sign_matrix(gen: Generator, n_rows: int, n: int, threads: int | None = None) -> np.ndarray:
    """``n_rows`` independent sign vectors of length ``n`` as an int8 matrix.

    For the SHA-256 generator row ``j`` equals ``random_signs(gen.spawn(j), n)``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    nbytes = (n + 7) // 8

    if isinstance(gen, SeededGenerator):
        nblocks = math.ceil(nbytes / BLOCK_SIZE)
        counters = [i.to_bytes(8, "big") for i in range(nblocks)]
        sha = hashlib.sha256
        seed = gen.seed

        def chunk(c, lo, hi):
            raw = b"".join(
                sha(seed + j.to_bytes(8, "big") + ctr).digest()
                for j in range(lo, hi) for ctr in counters
            )
            arr = np.frombuffer(raw, dtype=np.uint8).reshape(hi - lo, nblocks * BLOCK_SIZE)
            bits = np.unpackbits(arr[:, :nbytes], axis=1)[:, :n].astype(np.int8)
            return 2 * bits - 1
    else:
        def chunk(c, lo, hi):
            rng = gen.spawn(c).numpy
            bits = rng.integers(0, 2, size=(hi - lo, n), dtype=np.int8)
            return 2 * bits - 1

    return _run_chunks(chunk, n_rows, n, np.int8, threads)


def assignment_matrix(gen: Generator, n_rows: int, n: int, m: int,
                      threads: int | None = None) -> np.ndarray:
    """``n_rows`` independent uniform assignments of ``m`` treated among ``n``.

    For the SHA-256 generator row ``j`` equals
    ``random_assignment(gen.spawn(j), n, m)``.  The PCG64 path shuffles whole
    rows with numpy's Fisher-Yates implementation.
    """
    _check_mn(n, m)

    if isinstance(gen, SeededGenerator):
        def chunk(c, lo, hi):
            out = np.empty((hi - lo, n), dtype=np.int8)
            for r, j in enumerate(range(lo, hi)):
                out[r] = random_assignment(gen.spawn(j), n, m)
            return out
    else:
        base = np.zeros(n, dtype=np.int8)
        base[:m] = 1

        def chunk(c, lo, hi):
            rng = gen.spawn(c).numpy
            rows = np.tile(base, (hi - lo, 1))
            return rng.permuted(rows, axis=1, out=rows)

    return _run_chunks(chunk, n_rows, n, np.int8, threads)
