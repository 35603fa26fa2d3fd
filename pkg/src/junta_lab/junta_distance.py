"""Exact distance oracles: nearest k-junta and disjoint bichromatic matchings.

Distances are exact rationals (disagreement count over 2^n); far/not-far
decisions never go through floating point.  The matching oracle is exact
because the hypercube is bipartite by parity, so a bipartite maximum
matching over the bichromatic edges gives the true optimum rather than a
bound.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .boolfn import BitString, IndexSet, TruthTable
from .errors import InvalidInput, TooLarge

DIST_CAP = 20


@dataclass(frozen=True)
class DistanceReport:
    """Exact distance to the nearest k-junta plus an achieving witness."""

    distance: Fraction
    witness: IndexSet
    epsilon: Optional[float] = None
    far: Optional[bool] = None

    def as_json_dict(self) -> dict:
        # disagreement count over the full 2^n, not the reduced fraction
        denominator = 1 << self.witness.universe_size
        return {
            "numerator": int(self.distance * denominator),
            "denominator": denominator,
            "distance": float(self.distance),
            "witness": list(self.witness.members),
            "epsilon": self.epsilon,
            "far": self.far,
        }


@dataclass(frozen=True)
class MatchingCertificate:
    """A maximum set of vertex-disjoint bichromatic edges with directions in V.

    Each edge is recorded as (x, direction): the pair {x, flip(x, direction)}.
    """

    V: IndexSet
    size: int
    edges: tuple[tuple[BitString, int], ...]

    def validate(self, f: TruthTable) -> None:
        """Raise unless every edge is bichromatic, in-direction, and disjoint."""
        if self.size != len(self.edges):
            raise InvalidInput("certificate size disagrees with its edge list")
        seen: set[int] = set()
        allowed = set(self.V.members)
        n = f.n
        for x, direction in self.edges:
            if direction not in allowed:
                raise InvalidInput(f"direction {direction} not in V")
            y = x.code ^ (1 << (n - direction))
            if f.table[x.code] == f.table[y]:
                raise InvalidInput(f"edge at {x} direction {direction} is monochromatic")
            if x.code in seen or y in seen:
                raise InvalidInput("certificate edges share a vertex")
            seen.add(x.code)
            seen.add(y)


def _as_indexset(J: IndexSet | Sequence[int], n: int) -> IndexSet:
    if isinstance(J, IndexSet):
        if J.universe_size != n:
            raise InvalidInput(f"index set universe {J.universe_size} != n = {n}")
        return J
    return IndexSet.of(n, J)


def _fiber_ids(n: int, coords: Sequence[int]) -> np.ndarray:
    """For every code, the projection onto coords read as an integer."""
    codes = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.int64)
    for pos, j in enumerate(coords):
        out |= ((codes >> (n - j)) & 1) << (len(coords) - 1 - pos)
    return out


def dist_to_junta_on(f: TruthTable, J: IndexSet | Sequence[int]) -> Fraction:
    """Exact distance from f to the closest function depending only on J.

    On each fiber x|_J = b the best approximator takes the majority value,
    so the distance is sum_b min(zeros_b, ones_b) / 2^n.
    """
    n = f.n
    if n > DIST_CAP:
        raise TooLarge(f"n = {n} exceeds the exact-distance cap {DIST_CAP}")
    J = _as_indexset(J, n)
    if not J.members:
        ones = int(f.table.sum())
        return Fraction(min(ones, (1 << n) - ones), 1 << n)
    fibers = _fiber_ids(n, J.members)
    ones = np.bincount(fibers, weights=f.table, minlength=1 << len(J)).astype(np.int64)
    fiber_size = 1 << (n - len(J))
    disagreements = int(np.minimum(ones, fiber_size - ones).sum())
    return Fraction(disagreements, 1 << n)


def dist_to_k_junta(f: TruthTable, k: int, epsilon: float | None = None) -> DistanceReport:
    """Minimum of dist_to_junta_on over all size-k subsets, with a witness.

    Cost is C(n,k) * 2^n, comfortable up to about n = 14.  Ties resolve to
    the lexicographically smallest witness.
    """
    n = f.n
    if n > DIST_CAP:
        raise TooLarge(f"n = {n} exceeds the exact-distance cap {DIST_CAP}")
    if not 0 <= k <= n:
        raise InvalidInput(f"k must be in [0, n], got {k}")
    best: Fraction | None = None
    witness: tuple[int, ...] = ()
    for J in combinations(range(1, n + 1), k):
        d = dist_to_junta_on(f, J)
        if best is None or d < best:
            best, witness = d, J
            if best == 0:
                break
    assert best is not None
    far = None if epsilon is None else bool(best >= Fraction(epsilon))
    return DistanceReport(
        distance=best, witness=IndexSet.of(n, witness), epsilon=epsilon, far=far
    )


def _hopcroft_karp(left: list[int], adj: dict[int, list[int]]) -> dict[int, int]:
    """Maximum bipartite matching; returns the left-to-right assignment."""
    INF = float("inf")
    match_left: dict[int, int] = {}
    match_right: dict[int, int] = {}
    dist: dict[int, float] = {}

    def bfs() -> bool:
        queue: deque[int] = deque()
        for u in left:
            if u not in match_left:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                w = match_right.get(v)
                if w is None:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root: int) -> bool:
        # Iterative layered DFS; augmenting paths can be long at n ~ 20.
        stack: list[tuple[int, Iterable[int]]] = [(root, iter(adj[root]))]
        picked: list[int] = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                w = match_right.get(v)
                if w is None:
                    picked.append(v)
                    for (uu, _), vv in zip(stack, picked):
                        match_left[uu] = vv
                        match_right[vv] = uu
                    return True
                if dist[w] == dist[u] + 1:
                    picked.append(v)
                    stack.append((w, iter(adj[w])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = INF
                stack.pop()
                if picked:
                    picked.pop()
        return False

    while bfs():
        for u in left:
            if u not in match_left:
                dfs(u)
    return match_left


def max_disjoint_bichromatic_matching(f: TruthTable, V: IndexSet | Sequence[int]) -> MatchingCertificate:
    """Exact maximum vertex-disjoint set of bichromatic edges in directions V."""
    n = f.n
    if n > DIST_CAP:
        raise TooLarge(f"n = {n} exceeds the matching cap {DIST_CAP}")
    V = _as_indexset(V, n)
    if not V.members:
        raise InvalidInput("V must be non-empty")
    table = f.table
    masks = [1 << (n - j) for j in V.members]

    codes = np.arange(1 << n, dtype=np.int64)
    parity = np.zeros(1 << n, dtype=np.int64)
    for shift in range(n):
        parity ^= (codes >> shift) & 1

    adj: dict[int, list[int]] = {}
    for mask in masks:
        partners = codes ^ mask
        bichromatic = np.nonzero(table != table[partners])[0]
        for x in bichromatic:
            if parity[x] == 0:
                adj.setdefault(int(x), []).append(int(x) ^ mask)
    left = sorted(adj)
    match = _hopcroft_karp(left, adj)

    mask_to_dir = {m: j for m, j in zip(masks, V.members)}
    edges = tuple(
        (BitString(n, x), mask_to_dir[x ^ y]) for x, y in sorted(match.items())
    )
    return MatchingCertificate(V=V, size=len(edges), edges=edges)


def greedy_direction_matching_size(f: TruthTable, V: IndexSet | Sequence[int]) -> int:
    """Greedy per-direction disjoint edge count; a lower bound on the exact matching."""
    n = f.n
    V = _as_indexset(V, n)
    used = np.zeros(1 << n, dtype=bool)
    table = f.table
    total = 0
    for j in V.members:
        mask = 1 << (n - j)
        for x in range(1 << n):
            y = x ^ mask
            if x < y and not used[x] and not used[y] and table[x] != table[y]:
                used[x] = used[y] = True
                total += 1
    return total


def farness_from_matching(cert: MatchingCertificate, epsilon: float, n: int) -> bool:
    """True iff the certificate size reaches epsilon * 2^n.

    When true, every function depending on no direction in V disagrees
    with f on at least epsilon * 2^n points: each certificate edge flips a
    direction such a function ignores, so it contributes one disagreement,
    and the edges share no vertices.  Exact rational comparison.
    """
    if n < 1:
        raise InvalidInput(f"n must be positive, got {n}")
    return Fraction(cert.size, 1 << n) >= Fraction(epsilon)
