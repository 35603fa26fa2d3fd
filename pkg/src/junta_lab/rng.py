"""Seeded determinism: 64-bit seeds, labeled substreams, and digest-derived bits.

Every random choice in the package flows through one of two mechanisms:

* ``derive_bit`` / ``derive_u64``: a keyed blake2b digest of
  ``(seed, role, payload)``.  Stateless, so lazily evaluated objects can
  re-derive any bit on demand without caching.
* ``RandomStream``: a PCG64 generator whose state is derived from
  ``(seed, role)``.  Used for bulk sampling where a stateful stream is the
  natural fit (subset draws, Monte-Carlo trials).

Distinct role labels give computationally independent streams; the same
seed and role always reproduce the same draws.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

_U64 = 1 << 64


@dataclass(frozen=True)
class Seed:
    """A 64-bit unsigned seed value."""

    value: int

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or not 0 <= self.value < _U64:
            raise InvalidInput(f"seed must be a 64-bit unsigned integer, got {self.value!r}")

    def mix(self, index: int) -> "Seed":
        """Derive the seed for trial number ``index`` of a Monte-Carlo run."""
        return Seed(derive_u64(self, "mix", pack_ints(index)))

    def _key(self) -> bytes:
        return self.value.to_bytes(8, "little")


def pack_ints(*values: int) -> bytes:
    """Length-prefixed big-endian encoding of non-negative integers.

    Unambiguous for arbitrary-precision values, so address indices larger
    than 64 bits are safe payloads.
    """
    out = bytearray()
    for v in values:
        if v < 0:
            raise InvalidInput(f"payload integers must be non-negative, got {v}")
        body = v.to_bytes(max(1, (v.bit_length() + 7) // 8), "big")
        out += len(body).to_bytes(4, "big")
        out += body
    return bytes(out)


def _person(role: str) -> bytes:
    raw = role.encode("utf-8")
    if len(raw) <= hashlib.blake2b.PERSON_SIZE:
        return raw
    return hashlib.blake2b(raw, digest_size=hashlib.blake2b.PERSON_SIZE).digest()


def derive_u64(seed: Seed, role: str, payload: bytes) -> int:
    """Avalanche-mix ``(seed, role, payload)`` into a uniform 64-bit word."""
    digest = hashlib.blake2b(
        payload, digest_size=8, key=seed._key(), person=_person(role)
    ).digest()
    return int.from_bytes(digest, "big")


def derive_bit(seed: Seed, role: str, payload: bytes, threshold: float) -> int:
    """Return 1 with probability ``threshold``, deterministically per input.

    The 64-bit digest is mapped to [0, 1) by division by 2^64 and compared
    against the threshold, so threshold 0 never fires and threshold 1
    always does.
    """
    if not 0.0 <= threshold <= 1.0:
        raise InvalidInput(f"threshold must be in [0, 1], got {threshold}")
    return 1 if derive_u64(seed, role, payload) / _U64 < threshold else 0


class RandomStream:
    """A deterministic PCG64 stream tied to a seed and a role label."""

    def __init__(self, seed: Seed, role: str):
        self.seed = seed
        self.role = role
        entropy = hashlib.blake2b(
            b"stream", digest_size=16, key=seed._key(), person=_person(role)
        ).digest()
        self._gen = np.random.Generator(np.random.PCG64(int.from_bytes(entropy, "big")))

    def child(self, label: str) -> "RandomStream":
        """An independent stream scoped under this one."""
        return RandomStream(self.seed, f"{self.role}/{label}")

    def random(self, size: int | None = None):
        return self._gen.random(size)

    def integers(self, low: int, high: int) -> int:
        """Uniform integer in [low, high)."""
        return int(self._gen.integers(low, high))

    def integers_array(self, low: int, high: int, size: int) -> np.ndarray:
        """Array of independent uniform integers in [low, high)."""
        return self._gen.integers(low, high, size=size)

    def u64(self) -> int:
        return int(self._gen.integers(0, _U64, dtype=np.uint64))

    def bernoulli_mask(self, count: int, prob: float) -> np.ndarray:
        """Boolean array of ``count`` independent coin flips."""
        return self._gen.random(count) < prob

    def sample_without_replacement(self, population: int, k: int) -> np.ndarray:
        """k distinct values from range(population), sorted."""
        return np.sort(self._gen.choice(population, size=k, replace=False))
