"""Boolean functions: bit strings, truth tables, and lazy structured instances.

Coordinate indices are 1-based throughout the public API.  A length-n bit
string is encoded as the integer whose binary expansion, most significant
bit first, reads x_1 x_2 ... x_n; truth tables are indexed by that code.
The addressing map uses the same convention: the smallest index of the
addressing set contributes the most significant bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, InvalidInput, TooLarge
from .params import Params
from .rng import Seed, derive_bit, pack_ints

TABLE_CAP = 24

YES_STYLE = "yes_style"
NO_STYLE = "no_style"


@dataclass(frozen=True)
class BitString:
    """An immutable string in {0,1}^length."""

    length: int
    code: int

    def __post_init__(self) -> None:
        if self.length < 1:
            raise InvalidInput(f"length must be positive, got {self.length}")
        if not 0 <= self.code < (1 << self.length):
            raise InvalidInput(f"code {self.code} out of range for length {self.length}")

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(length, 0)

    @classmethod
    def from_text(cls, text: str) -> "BitString":
        if not text or set(text) - {"0", "1"}:
            raise InvalidInput(f"bit string text must be non-empty 0/1, got {text!r}")
        return cls(len(text), int(text, 2))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitString":
        code = 0
        for b in bits:
            if b not in (0, 1):
                raise InvalidInput(f"bits must be 0/1, got {b!r}")
            code = (code << 1) | b
        return cls(len(bits), code)

    def bit(self, i: int) -> int:
        if not 1 <= i <= self.length:
            raise IndexOutOfRange(f"coordinate {i} not in [1, {self.length}]")
        return (self.code >> (self.length - i)) & 1

    def bits(self) -> tuple[int, ...]:
        return tuple((self.code >> (self.length - i)) & 1 for i in range(1, self.length + 1))

    def restrict(self, coords: Iterable[int]) -> tuple[int, ...]:
        """Projection onto a sequence of coordinates, in the order given."""
        return tuple(self.bit(i) for i in coords)

    def to_text(self) -> str:
        return format(self.code, f"0{self.length}b")

    def __str__(self) -> str:
        return self.to_text()


def flip(x: BitString, i: int) -> BitString:
    """The string differing from x exactly at coordinate i."""
    if not 1 <= i <= x.length:
        raise IndexOutOfRange(f"coordinate {i} not in [1, {x.length}]")
    return BitString(x.length, x.code ^ (1 << (x.length - i)))


def hamming(x: BitString, y: BitString) -> int:
    if x.length != y.length:
        raise DimensionMismatch(f"lengths differ: {x.length} vs {y.length}")
    return (x.code ^ y.code).bit_count()


@dataclass(frozen=True)
class IndexSet:
    """A sorted duplicate-free subset of [1, universe_size]."""

    universe_size: int
    members: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.universe_size < 1:
            raise InvalidInput(f"universe_size must be positive, got {self.universe_size}")
        for i in self.members:
            if not 1 <= i <= self.universe_size:
                raise InvalidInput(f"member {i} outside [1, {self.universe_size}]")
        if list(self.members) != sorted(set(self.members)):
            raise InvalidInput("members must be sorted and duplicate-free")

    @classmethod
    def of(cls, universe_size: int, members: Iterable[int]) -> "IndexSet":
        return cls(universe_size, tuple(sorted(set(int(i) for i in members))))

    @classmethod
    def full(cls, universe_size: int) -> "IndexSet":
        return cls(universe_size, tuple(range(1, universe_size + 1)))

    def complement(self) -> "IndexSet":
        present = set(self.members)
        return IndexSet(
            self.universe_size,
            tuple(i for i in range(1, self.universe_size + 1) if i not in present),
        )

    def __contains__(self, i: int) -> bool:
        return i in set(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def address_index(M: IndexSet, x: BitString) -> int:
    """The integer in [1, 2^|M|] encoded by x's projection on M, plus one.

    The smallest member of M contributes the most significant bit.
    """
    if M.universe_size != x.length:
        raise DimensionMismatch(
            f"universe {M.universe_size} does not match string length {x.length}"
        )
    if not M.members:
        raise InvalidInput("the addressing set must be non-empty")
    value = 0
    for i in M.members:
        value = (value << 1) | x.bit(i)
    return value + 1


class TruthTable:
    """An explicit function {0,1}^n -> {0,1}, capped at n <= 24."""

    __slots__ = ("n", "table")

    def __init__(self, n: int, table: np.ndarray):
        if n < 1:
            raise InvalidInput(f"n must be positive, got {n}")
        if n > TABLE_CAP:
            raise TooLarge(f"n = {n} exceeds the truth-table cap {TABLE_CAP}")
        arr = np.asarray(table, dtype=np.uint8)
        if arr.shape != (1 << n,):
            raise InvalidInput(f"table must have exactly 2^{n} entries")
        if arr.max(initial=0) > 1:
            raise InvalidInput("table entries must be 0/1")
        self.n = n
        self.table = arr
        self.table.setflags(write=False)

    @classmethod
    def constant(cls, n: int, bit: int) -> "TruthTable":
        if bit not in (0, 1):
            raise InvalidInput(f"bit must be 0/1, got {bit!r}")
        return cls(n, np.full(1 << n, bit, dtype=np.uint8))

    def eval(self, x: BitString) -> int:
        if x.length != self.n:
            raise DimensionMismatch(f"query length {x.length} != {self.n}")
        return int(self.table[x.code])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruthTable):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.n, self.table.tobytes()))

    def serialize(self) -> str:
        """``n=<int>`` line, then 2^n characters of 0/1 in code order."""
        bits = "".join("1" if b else "0" for b in self.table)
        return f"n={self.n}\n{bits}\n"

    @classmethod
    def deserialize(cls, text: str) -> "TruthTable":
        lines = text.splitlines()
        if len(lines) < 2 or not lines[0].startswith("n="):
            raise InvalidInput("expected 'n=<int>' then a 0/1 line")
        try:
            n = int(lines[0][2:])
        except ValueError as exc:
            raise InvalidInput(f"malformed dimension line {lines[0]!r}") from exc
        if n < 1 or n > TABLE_CAP:
            raise TooLarge(f"n = {n} outside [1, {TABLE_CAP}]")
        bits = lines[1]
        if len(bits) != 1 << n or set(bits) - {"0", "1"}:
            raise InvalidInput("table line must be exactly 2^n characters of 0/1")
        return cls(n, np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0"))


_S_ROLE = "S-membership"
_H_ROLE = "h-value"


@dataclass(frozen=True)
class StructuredFn:
    """A lazily evaluated instance f(x) = h_{address(x)}(x restricted to S).

    Evaluation is stateless: the address selects a per-fiber coordinate
    subset S (each member of A joins with probability epsilon/sqrt(n)) and
    a per-fiber random function value, both re-derived from the seed on
    every call, so repeated queries always agree and instances are safe to
    share across threads.
    """

    params: Params
    M: IndexSet
    A: IndexSet
    seed: Seed
    kind: str

    def __post_init__(self) -> None:
        n = self.params.n
        if self.M.universe_size != n or self.A.universe_size != n:
            raise DimensionMismatch("M and A must live in the params universe")
        if len(self.M) != self.params.t:
            raise InvalidInput(f"|M| = {len(self.M)} but t = {self.params.t}")
        if set(self.M.members) & set(self.A.members):
            raise InvalidInput("M and A must be disjoint")
        if self.kind not in (YES_STYLE, NO_STYLE):
            raise InvalidInput(f"kind must be {YES_STYLE!r} or {NO_STYLE!r}")

    @property
    def n(self) -> int:
        return self.params.n

    def fiber_coords(self, address: int) -> tuple[int, ...]:
        """The members of A that join the coordinate subset for this address."""
        theta = self.params.coin_prob
        return tuple(
            a
            for a in self.A.members
            if derive_bit(self.seed, _S_ROLE, pack_ints(address, a), theta)
        )

    def eval(self, x: BitString) -> int:
        if x.length != self.n:
            raise DimensionMismatch(f"query length {x.length} != {self.n}")
        address = address_index(self.M, x)
        coords = self.fiber_coords(address)
        payload = pack_ints(address, len(coords), *coords, *(x.bit(a) for a in coords))
        return derive_bit(self.seed, _H_ROLE, payload, 0.5)


BoolFn = Union[TruthTable, StructuredFn]


def to_table(f: StructuredFn) -> TruthTable:
    """Materialize a structured instance; capped at n <= 24."""
    n = f.n
    if n > TABLE_CAP:
        raise TooLarge(f"n = {n} exceeds the truth-table cap {TABLE_CAP}")
    out = np.empty(1 << n, dtype=np.uint8)
    for code in range(1 << n):
        out[code] = f.eval(BitString(n, code))
    return TruthTable(n, out)


def relevant_variables(f: TruthTable) -> IndexSet:
    """Exactly the coordinates i with f(x) != f(flip(x, i)) for some x."""
    n = f.n
    view = f.table.reshape((2,) * n)
    members = [
        i
        for i in range(1, n + 1)
        if not np.array_equal(view.take(0, axis=i - 1), view.take(1, axis=i - 1))
    ]
    return IndexSet.of(n, members)
