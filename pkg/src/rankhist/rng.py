"""Reproducible random streams built on the counter-based Philox generator.

Every stochastic operation in this package draws from a stream addressed by
``(master_seed, tag)``. The tag (a short string such as ``"null"`` or
``"transform"``) is hashed into a Philox key, and consumers index into the
resulting stream of doubles by absolute position. Replicate ``i`` of a
simulation owns the fixed slice ``[i * stride, i * stride + draws)`` of its
stream, so any partition of the replicates across workers reproduces the
exact same numbers. Philox emits four 64-bit words per counter increment,
which is why slice starts are kept 4-aligned.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import DomainError

# Philox-4x64 produces four doubles per counter tick; advance() counts ticks.
_WORDS_PER_TICK = 4


def _tag_entropy(tag: str) -> tuple[int, ...]:
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    return tuple(int.from_bytes(digest[i : i + 8], "little") for i in range(0, 32, 8))


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)


def stream_key(master_seed: int, tag: str) -> tuple[int, int]:
    """Derive the Philox key of the ``(master_seed, tag)`` stream."""
    ss = np.random.SeedSequence(check_seed(master_seed), spawn_key=_tag_entropy(tag))
    words = ss.generate_state(2, np.uint64)
    return int(words[0]), int(words[1])


def uniform_block(key: tuple[int, int], start: int, count: int) -> np.ndarray:
    """Return doubles ``[start, start + count)`` of the keyed stream.

    ``start`` must be a multiple of four so it maps onto a whole counter
    tick; all strides handed out by :func:`replicate_stride` satisfy this.
    """
    if start % _WORDS_PER_TICK:
        raise ValueError(f"stream offset {start} is not 4-aligned")
    bitgen = np.random.Philox(key=np.asarray(key, dtype=np.uint64))
    if start:
        bitgen.advance(start // _WORDS_PER_TICK)
    return np.random.Generator(bitgen).random(count)


def replicate_stride(draws_per_replicate: int) -> int:
    """Words reserved per replicate: ``draws`` rounded up to a tick boundary."""
    q, r = divmod(draws_per_replicate, _WORDS_PER_TICK)
    return (q + bool(r)) * _WORDS_PER_TICK


def replicate_uniforms(
    key: tuple[int, int], first: int, count: int, draws_per_replicate: int
) -> np.ndarray:
    """Uniforms for replicates ``first .. first + count`` as a 2-D block.

    Replicate ``i`` always reads the same slice of the stream, regardless of
    how replicates are batched, so results never depend on worker count.
    """
    stride = replicate_stride(draws_per_replicate)
    flat = uniform_block(key, first * stride, count * stride)
    return flat.reshape(count, stride)[:, :draws_per_replicate]


def derive_seed(seed: int, *parts: object) -> int:
    """Fold ``parts`` into ``seed`` to obtain a derived, stable child seed."""
    payload = repr((check_seed(seed),) + parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")
