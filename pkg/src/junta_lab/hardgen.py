"""Samplers for the hard-instance distributions.

Yes-style and no-style structured instances share everything except the
inclusion rate of the coordinate pool A (p = 1/2 versus q > 1/2).  Their
per-fiber randomness is never materialized; it is re-derived on demand
from the seed, which keeps memory O(1) even when the number of fibers is
astronomically large.

The two tail distributions produce explicit truth tables: iid
Bernoulli(3*epsilon) entries, or exactly round(2^n * epsilon) ones placed
uniformly at random.
"""

from __future__ import annotations

import numpy as np

from .boolfn import NO_STYLE, YES_STYLE, IndexSet, StructuredFn, TruthTable, TABLE_CAP
from .errors import EpsilonOutOfRange, TooLarge, WeightOutOfRange
from .params import Params
from .rng import RandomStream, Seed, derive_bit, derive_u64, pack_ints

__all__ = [
    "Seed",
    "RandomStream",
    "derive_bit",
    "derive_u64",
    "pack_ints",
    "sample_yes",
    "sample_no",
    "sample_conditioned",
    "sample_addressing_set",
    "sample_d1",
    "sample_d2",
]


def sample_addressing_set(params: Params, seed: Seed) -> IndexSet:
    """A uniform size-t subset of [n], via partial Fisher-Yates."""
    n, t = params.n, params.t
    stream = RandomStream(seed, "M")
    arr = list(range(1, n + 1))
    for pos in range(t):
        j = stream.integers(pos, n)
        arr[pos], arr[j] = arr[j], arr[pos]
    return IndexSet.of(n, arr[:t])


def _sample_pool(params: Params, seed: Seed, M: IndexSet, inclusion: float) -> IndexSet:
    rest = M.complement().members
    mask = RandomStream(seed, "A").bernoulli_mask(len(rest), inclusion)
    return IndexSet.of(params.n, (c for c, hit in zip(rest, mask) if hit))


def sample_conditioned(
    params: Params, seed: Seed, M: IndexSet, inclusion: float, kind: str
) -> StructuredFn:
    """A structured instance with the addressing set held fixed.

    A includes each coordinate outside M independently with the given
    rate; all per-fiber randomness still derives lazily from the seed.
    """
    A = _sample_pool(params, seed, M, inclusion)
    return StructuredFn(params=params, M=M, A=A, seed=seed, kind=kind)


def sample_yes(params: Params, seed: Seed) -> StructuredFn:
    """Draw a yes-style instance: pool inclusion rate p."""
    M = sample_addressing_set(params, seed)
    return sample_conditioned(params, seed, M, params.p, YES_STYLE)


def sample_no(params: Params, seed: Seed) -> StructuredFn:
    """Draw a no-style instance: pool inclusion rate q."""
    M = sample_addressing_set(params, seed)
    return sample_conditioned(params, seed, M, params.q, NO_STYLE)


def sample_d1(n: int, epsilon: float, stream: RandomStream) -> TruthTable:
    """Each of the 2^n table bits is independently 1 with probability 3*epsilon."""
    if n > TABLE_CAP:
        raise TooLarge(f"n = {n} exceeds the truth-table cap {TABLE_CAP}")
    if not 0.0 < epsilon <= 0.2:
        raise EpsilonOutOfRange(f"epsilon must be in (0, 1/5], got {epsilon}")
    bits = stream.bernoulli_mask(1 << n, 3.0 * epsilon)
    return TruthTable(n, bits.astype(np.uint8))


def sample_d2(n: int, epsilon: float, stream: RandomStream) -> TruthTable:
    """Exactly round(2^n * epsilon) ones at uniform positions without replacement."""
    if n > TABLE_CAP:
        raise TooLarge(f"n = {n} exceeds the truth-table cap {TABLE_CAP}")
    size = 1 << n
    weight = round(size * epsilon)
    if not 1 <= weight <= size:
        raise WeightOutOfRange(
            f"round(2^{n} * {epsilon}) = {weight} outside [1, 2^{n}]"
        )
    table = np.zeros(size, dtype=np.uint8)
    table[stream.sample_without_replacement(size, weight)] = 1
    return TruthTable(n, table)
