"""Oracle games over a hidden subset and the reductions between them.

Three query models against a hidden set A inside [m]:

* set queries: a list of subsets; each queried element of A answers 1
  independently with rate epsilon/sqrt(n), elements outside A answer 0.
* element queries: a count vector; element i of A answers 1 with the
  compounded rate of ell_i coins.
* string queries: a non-adaptive list of n-bit strings plus a decider,
  played against a Boolean function instead of a set.

The two reductions implemented here: string plans collapse to set plans
through the addressing-set equivalence classes (with the per-class
selected-coordinate simulation), and set plans collapse to element plans
through per-element multiplicity counting (with an exact conditional
lifting of the single response bit back to per-query bits).

Outcome conventions: a set-query response is a tuple of per-query bit
tuples aligned with the sorted members of each query; an element-query
response is a length-m bit tuple.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product as iter_product
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .binom_stats import hit_prob
from .boolfn import BitString, IndexSet, address_index, hamming
from .errors import (
    BadM,
    DimensionMismatch,
    InconsistentInput,
    InvalidInput,
    TooLarge,
)
from .params import Params
from .rng import RandomStream, Seed, derive_bit, pack_ints

YES = "yes"
NO = "no"

OUTCOME_SPACE_CAP = 1 << 20
ADVANTAGE_UNIVERSE_CAP = 14

SssqResponse = tuple[tuple[int, ...], ...]
SseqResponse = tuple[int, ...]
Decider = Callable[[tuple[int, ...]], str]


@dataclass(frozen=True)
class HiddenSet:
    """The set a game oracle hides, with the distribution it came from."""

    m: int
    A: IndexSet
    origin: Optional[str] = None

    def __post_init__(self) -> None:
        if self.A.universe_size != self.m:
            raise DimensionMismatch(
                f"hidden set universe {self.A.universe_size} != m = {self.m}"
            )
        if self.origin not in (None, YES, NO):
            raise InvalidInput(f"origin must be {YES!r}, {NO!r} or None")


@dataclass(frozen=True)
class SetQueryPlan:
    """A non-adaptive list of set queries over [m]; cost is the total size."""

    m: int
    queries: tuple[IndexSet, ...]

    def __post_init__(self) -> None:
        if len(self.queries) < 1:
            raise InvalidInput("a set-query plan needs at least one query")
        for T in self.queries:
            if T.universe_size != self.m:
                raise DimensionMismatch(f"query universe {T.universe_size} != m = {self.m}")

    @classmethod
    def of(cls, m: int, sets: Iterable[Iterable[int]]) -> "SetQueryPlan":
        return cls(m, tuple(IndexSet.of(m, T) for T in sets))

    @property
    def cost(self) -> int:
        return sum(len(T) for T in self.queries)


@dataclass(frozen=True)
class ElementQueryPlan:
    """Per-element repeat counts; cost is their sum."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts):
            raise InvalidInput("counts must be non-negative")

    @classmethod
    def of(cls, counts: Iterable[int]) -> "ElementQueryPlan":
        return cls(tuple(int(c) for c in counts))

    @classmethod
    def uniform(cls, m: int, per_element: int) -> "ElementQueryPlan":
        return cls((per_element,) * m)

    @property
    def m(self) -> int:
        return len(self.counts)

    @property
    def cost(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class StringQueryPlan:
    """Non-adaptive n-bit string queries with a total decider over the replies."""

    queries: tuple[BitString, ...]
    decider: Decider

    def __post_init__(self) -> None:
        if len(self.queries) < 1:
            raise InvalidInput("a string-query plan needs at least one query")
        lengths = {x.length for x in self.queries}
        if len(lengths) != 1:
            raise DimensionMismatch(f"queries have mixed lengths {sorted(lengths)}")

    @property
    def q(self) -> int:
        return len(self.queries)

    @property
    def n(self) -> int:
        return self.queries[0].length


@dataclass(frozen=True)
class Summary:
    """Per-bin popcounts of an element-query response."""

    counts: tuple[int, ...]


def sample_hidden(
    m: int, prob: float, stream: RandomStream, origin: Optional[str] = None
) -> HiddenSet:
    """Include each element of [m] independently with the given probability."""
    if m < 1:
        raise InvalidInput(f"m must be positive, got {m}")
    if not 0.0 <= prob <= 1.0:
        raise InvalidInput(f"prob must be in [0, 1], got {prob}")
    mask = stream.bernoulli_mask(m, prob)
    members = (i + 1 for i in range(m) if mask[i])
    return HiddenSet(m=m, A=IndexSet.of(m, members), origin=origin)


def _theta(epsilon: float, n: int) -> float:
    theta = epsilon / math.sqrt(n)
    if not 0.0 <= theta <= 1.0:
        raise InvalidInput(f"epsilon/sqrt(n) = {theta} outside [0, 1]")
    return theta


def sssq_respond(
    hidden: HiddenSet,
    plan: SetQueryPlan,
    epsilon: float,
    n: int,
    stream: RandomStream,
) -> SssqResponse:
    """One oracle round: per queried element, 0 off A, rate-theta coin on A."""
    if plan.m != hidden.m:
        raise DimensionMismatch(f"plan universe {plan.m} != hidden universe {hidden.m}")
    theta = _theta(epsilon, n)
    members = set(hidden.A.members)
    response = []
    for T in plan.queries:
        draws = stream.random(len(T)) if len(T) else []
        response.append(
            tuple(
                1 if (j in members and draws[pos] < theta) else 0
                for pos, j in enumerate(T.members)
            )
        )
    return tuple(response)


def sseq_respond(
    hidden: HiddenSet,
    plan: ElementQueryPlan,
    epsilon: float,
    n: int,
    stream: RandomStream,
) -> SseqResponse:
    """One oracle round: element i of A answers 1 with the compounded hit rate."""
    if plan.m != hidden.m:
        raise DimensionMismatch(f"plan length {plan.m} != hidden universe {hidden.m}")
    members = set(hidden.A.members)
    draws = stream.random(plan.m)
    return tuple(
        1 if (i + 1 in members and draws[i] < hit_prob(plan.counts[i], epsilon, n)) else 0
        for i in range(plan.m)
    )


def set_plan_to_element_counts(plan: SetQueryPlan) -> ElementQueryPlan:
    """Per-element multiplicities across all set queries; cost is preserved."""
    counts = [0] * plan.m
    for T in plan.queries:
        for j in T.members:
            counts[j - 1] += 1
    return ElementQueryPlan.of(counts)


def _slots_by_element(plan: SetQueryPlan) -> dict[int, list[tuple[int, int]]]:
    """element -> list of (query index, position within that query's tuple)."""
    slots: dict[int, list[tuple[int, int]]] = {}
    for i, T in enumerate(plan.queries):
        for pos, j in enumerate(T.members):
            slots.setdefault(j, []).append((i, pos))
    return slots


def _truncated_ones_count(r: int, theta: float, stream: RandomStream) -> int:
    """Number of ones among r rate-theta coins, conditioned on at least one.

    Inverse-CDF over k in [1, r]; exact for every theta, including theta
    so small that rejection sampling would stall (the theta -> 0 limit is
    a single one).
    """
    weights = []
    for k in range(1, r + 1):
        weights.append(math.comb(r, k) * theta**k * (1.0 - theta) ** (r - k))
    total = math.fsum(weights)
    if total <= 0.0:
        return 1
    u = stream.random() * total
    acc = 0.0
    for k, w in enumerate(weights, start=1):
        acc += w
        if u < acc:
            return k
    return r


def lift_response(
    b: Sequence[int],
    plan: SetQueryPlan,
    epsilon: float,
    n: int,
    stream: RandomStream,
) -> SssqResponse:
    """Expand an element-query response into per-query bits.

    Elements that answered 0 stay 0 everywhere; an element that answered 1
    with multiplicity r gets r coins of rate epsilon/sqrt(n) conditioned
    on not being all zero, sampled exactly (truncated count, then uniform
    placement).
    """
    if len(b) != plan.m:
        raise DimensionMismatch(f"response length {len(b)} != plan universe {plan.m}")
    theta = _theta(epsilon, n)
    slots = _slots_by_element(plan)
    out = [[0] * len(T) for T in plan.queries]
    for j in range(1, plan.m + 1):
        if not b[j - 1]:
            continue
        positions = slots.get(j, [])
        r = len(positions)
        if r == 0:
            raise InconsistentInput(f"element {j} answered 1 but appears in no query")
        ones = _truncated_ones_count(r, theta, stream)
        chosen = stream.sample_without_replacement(r, ones)
        for idx in chosen:
            i, pos = positions[int(idx)]
            out[i][pos] = 1
    return tuple(tuple(row) for row in out)


AnyPlan = Union[SetQueryPlan, ElementQueryPlan]


def _check_outcome_space(plan: AnyPlan) -> None:
    if isinstance(plan, ElementQueryPlan):
        free = sum(1 for c in plan.counts if c > 0)
    else:
        free = plan.cost
    if free > 20:
        raise TooLarge(f"outcome space 2^{free} exceeds {OUTCOME_SPACE_CAP}")


def exact_response_distribution(
    A: IndexSet,
    plan: AnyPlan,
    epsilon: float,
    n: int,
) -> dict:
    """Exact law of the oracle response for a fixed hidden set.

    Keys are response outcomes in the module's outcome convention; values
    are probabilities summing to 1 (up to 1e-12).  Outcomes of probability
    zero are omitted.
    """
    _check_outcome_space(plan)
    theta = _theta(epsilon, n)
    members = set(A.members)
    if isinstance(plan, ElementQueryPlan):
        if A.universe_size != plan.m:
            raise DimensionMismatch(f"universe {A.universe_size} != plan length {plan.m}")
        locals_: list[list[tuple[int, float]]] = []
        for i in range(1, plan.m + 1):
            lam = hit_prob(plan.counts[i - 1], epsilon, n)
            if i in members and lam > 0.0:
                locals_.append([(0, 1.0 - lam), (1, lam)])
            else:
                locals_.append([(0, 1.0)])
        dist: dict = {}
        for combo in iter_product(*locals_):
            prob = math.prod(p for _, p in combo)
            if prob > 0.0:
                dist[tuple(bit for bit, _ in combo)] = prob
        return dist

    if A.universe_size != plan.m:
        raise DimensionMismatch(f"universe {A.universe_size} != plan universe {plan.m}")
    slots = _slots_by_element(plan)
    elements = sorted(slots)
    locals_sssq: list[list[tuple[tuple[int, ...], float]]] = []
    for j in elements:
        r = len(slots[j])
        if j in members and theta > 0.0:
            options = []
            for pattern in iter_product((0, 1), repeat=r):
                k = sum(pattern)
                options.append((pattern, theta**k * (1.0 - theta) ** (r - k)))
            locals_sssq.append(options)
        else:
            locals_sssq.append([((0,) * r, 1.0)])
    dist = {}
    for combo in iter_product(*locals_sssq):
        prob = math.prod(p for _, p in combo)
        if prob <= 0.0:
            continue
        out = [[0] * len(T) for T in plan.queries]
        for j, (pattern, _) in zip(elements, combo):
            for (i, pos), bit in zip(slots[j], pattern):
                out[i][pos] = bit
        key = tuple(tuple(row) for row in out)
        dist[key] = dist.get(key, 0.0) + prob
    return dist


def lifted_response_distribution(
    A: IndexSet,
    plan: SetQueryPlan,
    epsilon: float,
    n: int,
) -> dict:
    """Exact law of lift_response applied to an element-query oracle round.

    Marginalizes the intermediate bit of every element explicitly: the
    zero branch pins that element's slots to zero, the one branch carries
    the truncated coin pattern.
    """
    _check_outcome_space(plan)
    if A.universe_size != plan.m:
        raise DimensionMismatch(f"universe {A.universe_size} != plan universe {plan.m}")
    theta = _theta(epsilon, n)
    members = set(A.members)
    slots = _slots_by_element(plan)
    elements = sorted(slots)
    locals_: list[list[tuple[tuple[int, ...], float]]] = []
    for j in elements:
        r = len(slots[j])
        lam = hit_prob(r, epsilon, n)
        options: dict[tuple[int, ...], float] = {}
        for b_j, b_prob in ((0, (1.0 - lam) if j in members else 1.0),
                            (1, lam if j in members else 0.0)):
            if b_prob <= 0.0:
                continue
            if b_j == 0:
                zero = (0,) * r
                options[zero] = options.get(zero, 0.0) + b_prob
                continue
            norm = -math.expm1(r * math.log1p(-theta)) if theta < 1.0 else 1.0
            for pattern in iter_product((0, 1), repeat=r):
                k = sum(pattern)
                if k == 0:
                    continue
                cond = theta**k * (1.0 - theta) ** (r - k) / norm
                options[pattern] = options.get(pattern, 0.0) + b_prob * cond
        locals_.append(sorted(options.items()))
    dist: dict = {}
    for combo in iter_product(*locals_):
        prob = math.prod(p for _, p in combo)
        if prob <= 0.0:
            continue
        out = [[0] * len(T) for T in plan.queries]
        for j, (pattern, _) in zip(elements, combo):
            for (i, pos), bit in zip(slots[j], pattern):
                out[i][pos] = bit
        key = tuple(tuple(row) for row in out)
        dist[key] = dist.get(key, 0.0) + prob
    return dist


def tv_distance(dist_a: Mapping, dist_b: Mapping) -> float:
    """Half the L1 distance between two outcome laws given as dicts."""
    keys = set(dist_a) | set(dist_b)
    return 0.5 * math.fsum(abs(dist_a.get(k, 0.0) - dist_b.get(k, 0.0)) for k in keys)


def lift_equivalence_gap(A: IndexSet, plan: SetQueryPlan, epsilon: float, n: int) -> float:
    """TV distance between the direct set-query law and the lifted element-query law.

    The two are equal in distribution, so this should vanish up to float
    rounding for every hidden set.
    """
    direct = exact_response_distribution(A, plan, epsilon, n)
    lifted = lifted_response_distribution(A, plan, epsilon, n)
    return tv_distance(direct, lifted)


def is_separating(M: IndexSet, X: StringQueryPlan, tau: int) -> bool:
    """True iff every query pair at Hamming distance >= tau splits on M."""
    if tau < 1:
        raise InvalidInput(f"tau must be positive, got {tau}")
    queries = X.queries
    addresses = [address_index(M, x) for x in queries]
    for i in range(len(queries)):
        for j in range(i + 1, len(queries)):
            if hamming(queries[i], queries[j]) >= tau and addresses[i] == addresses[j]:
                return False
    return True


@dataclass(frozen=True)
class ReductionPlan:
    """A string plan regrouped into set queries over the non-addressing coordinates.

    Labels 1..m of the set-query universe correspond, in sorted order, to
    the coordinates outside M (``label_coords[label - 1]`` is the original
    coordinate).  ``address_of_class`` keeps each class's shared address
    value for introspection; the set-query game itself never reads it.
    """

    M: IndexSet
    label_coords: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]
    class_of: tuple[int, ...]
    set_plan: SetQueryPlan
    address_of_class: tuple[int, ...]


def build_set_queries(
    X: StringQueryPlan, M: IndexSet, tau: int, force: bool = False
) -> ReductionPlan:
    """Group queries by their projection on M and collect differing coordinates.

    Raises BadM when some far pair shares a projection, unless forced for
    negative testing.  With a separating M the total set-query cost is at
    most tau times the number of string queries.
    """
    if M.universe_size != X.n:
        raise DimensionMismatch(f"M universe {M.universe_size} != query length {X.n}")
    if not force and not is_separating(M, X, tau):
        raise BadM("some query pair at distance >= tau has equal projections on M")

    label_coords = M.complement().members
    m = len(label_coords)
    if m == 0:
        raise InvalidInput("M leaves no coordinates for set queries")
    label_of = {c: i + 1 for i, c in enumerate(label_coords)}

    class_index: dict[int, int] = {}
    classes: list[list[int]] = []
    class_of = []
    for idx, x in enumerate(X.queries):
        addr = address_index(M, x)
        if addr not in class_index:
            class_index[addr] = len(classes)
            classes.append([])
        c = class_index[addr]
        classes[c].append(idx)
        class_of.append(c)

    sets = []
    addresses = []
    for group in classes:
        base = X.queries[group[0]].code
        diff_mask = 0
        for idx in group[1:]:
            diff_mask |= base ^ X.queries[idx].code
        n = X.n
        coords = [
            label_of[c]
            for c in label_coords
            if (diff_mask >> (n - c)) & 1
        ]
        sets.append(IndexSet.of(m, coords))
        addresses.append(address_index(M, X.queries[group[0]]))
    set_plan = SetQueryPlan(m, tuple(sets))

    if not force and set_plan.cost > tau * X.q:
        raise InconsistentInput(
            f"cost {set_plan.cost} exceeds tau * q = {tau * X.q} despite a separating M"
        )
    return ReductionPlan(
        M=M,
        label_coords=tuple(label_coords),
        classes=tuple(tuple(g) for g in classes),
        class_of=tuple(class_of),
        set_plan=set_plan,
        address_of_class=tuple(addresses),
    )


class SssqSession:
    """One logical interrogation of a set-query oracle holding a hidden set."""

    def __init__(self, hidden: HiddenSet, epsilon: float, n: int, stream: RandomStream):
        self.hidden = hidden
        self.epsilon = epsilon
        self.n = n
        self._stream = stream
        self._used = False

    def respond(self, plan: SetQueryPlan) -> SssqResponse:
        if self._used:
            raise InconsistentInput("a session answers exactly one query plan")
        self._used = True
        return sssq_respond(self.hidden, plan, self.epsilon, self.n, self._stream)


def simulate_distinguisher(
    X: StringQueryPlan,
    M: IndexSet,
    params: Params,
    session: SssqSession,
    stream: RandomStream,
) -> str:
    """Play the string-query decider against a set-query oracle.

    Submits the reduced set plan, keeps the positions that answered 1, and
    feeds the decider one fresh uniform random function per class applied
    to each query's restriction to those positions.  Plans larger than
    (n/epsilon)^2 queries get a warning: nothing breaks mechanically, but
    the separation guarantees behind the reduction assume fewer queries.
    """
    if X.q > (params.n / params.epsilon) ** 2:
        warnings.warn(
            f"string plan has {X.q} queries, beyond (n/epsilon)^2; "
            "the reduction still runs but its cost guarantees weaken",
            stacklevel=2,
        )
    plan = build_set_queries(X, M, params.tau)
    response = session.respond(plan.set_plan)
    fn_seed = Seed(stream.u64())
    bits = []
    for idx, x in enumerate(X.queries):
        c = plan.class_of[idx]
        T = plan.set_plan.queries[c]
        live = [label for pos, label in enumerate(T.members) if response[c][pos]]
        restriction = tuple(x.bit(plan.label_coords[label - 1]) for label in live)
        payload = pack_ints(c, len(live), *live, *restriction)
        bits.append(derive_bit(fn_seed, "class-fn", payload, 0.5))
    return X.decider(tuple(bits))


def summarize(b: Sequence[int], bins: Sequence[IndexSet | Sequence[int]]) -> Summary:
    """Per-bin popcounts of an element-query response."""
    m = len(b)
    seen: set[int] = set()
    counts = []
    for one_bin in bins:
        members = tuple(one_bin.members) if isinstance(one_bin, IndexSet) else tuple(one_bin)
        for i in members:
            if not 1 <= i <= m:
                raise DimensionMismatch(f"bin member {i} outside [1, {m}]")
            if i in seen:
                raise DimensionMismatch(f"bins overlap at element {i}")
            seen.add(i)
        counts.append(sum(int(b[i - 1]) for i in members))
    return Summary(tuple(counts))


def canonicalize_plan(ell: ElementQueryPlan) -> ElementQueryPlan:
    """Round positive counts up to powers of two and sort them decreasing.

    The cost at most doubles; plans already in that shape are fixed points.
    """
    rounded = sorted(
        (1 << (c - 1).bit_length() for c in ell.counts if c > 0), reverse=True
    )
    return ElementQueryPlan.of(rounded + [0] * (ell.m - len(rounded)))


def _element_local_laws(
    plan: AnyPlan, inclusion: float, epsilon: float, n: int
) -> list[np.ndarray]:
    """Per-element response laws with the element's membership marginalized.

    Each element is in the hidden set independently, so enumerating hidden
    sets factorizes into a present/absent average per element.
    """
    theta = _theta(epsilon, n)
    laws = []
    if isinstance(plan, ElementQueryPlan):
        for c in plan.counts:
            if c == 0:
                continue
            lam = hit_prob(c, epsilon, n)
            present = np.array([1.0 - lam, lam])
            absent = np.array([1.0, 0.0])
            laws.append(inclusion * present + (1.0 - inclusion) * absent)
        return laws
    slots = _slots_by_element(plan)
    for j in sorted(slots):
        r = len(slots[j])
        present = np.empty(1 << r)
        for idx in range(1 << r):
            k = bin(idx).count("1")
            present[idx] = theta**k * (1.0 - theta) ** (r - k)
        absent = np.zeros(1 << r)
        absent[0] = 1.0
        laws.append(inclusion * present + (1.0 - inclusion) * absent)
    return laws


def exact_optimal_advantage(
    plan: AnyPlan,
    params: Params,
    p: Optional[float] = None,
    q: Optional[float] = None,
) -> float:
    """Best achievable advantage of any decider for this plan.

    Computes the full response laws under yes-side and no-side hidden-set
    inclusion rates and returns their total variation distance, which any
    decider attains at best (and a likelihood-threshold decider achieves).
    """
    m = plan.m
    if m > ADVANTAGE_UNIVERSE_CAP:
        raise TooLarge(f"m = {m} exceeds the exact-advantage cap {ADVANTAGE_UNIVERSE_CAP}")
    _check_outcome_space(plan)
    p_val = params.p if p is None else p
    q_val = params.q if q is None else q
    joint_yes = np.array([1.0])
    for law in _element_local_laws(plan, p_val, params.epsilon, params.n):
        joint_yes = np.kron(joint_yes, law)
    joint_no = np.array([1.0])
    for law in _element_local_laws(plan, q_val, params.epsilon, params.n):
        joint_no = np.kron(joint_no, law)
    return 0.5 * float(np.abs(joint_yes - joint_no).sum())


def response_log_likelihood(
    response: Union[SssqResponse, SseqResponse],
    plan: AnyPlan,
    inclusion: float,
    epsilon: float,
    n: int,
) -> float:
    """Log-probability of an observed response under a given inclusion rate."""
    theta = _theta(epsilon, n)
    total = 0.0
    if isinstance(plan, ElementQueryPlan):
        for i, c in enumerate(plan.counts):
            lam = hit_prob(c, epsilon, n)
            hit = inclusion * lam
            bit = response[i]
            if bit and hit == 0.0:
                return -math.inf
            total += math.log(hit) if bit else math.log1p(-hit)
        return total
    slots = _slots_by_element(plan)
    for j, positions in sorted(slots.items()):
        r = len(positions)
        k = sum(response[i][pos] for i, pos in positions)
        if k == 0:
            lam = hit_prob(r, epsilon, n)
            total += math.log1p(-inclusion * lam)
        else:
            mass = inclusion * theta**k * (1.0 - theta) ** (r - k)
            if mass == 0.0:
                return -math.inf
            total += math.log(mass)
    return total


def bayes_decide(
    response: Union[SssqResponse, SseqResponse],
    plan: AnyPlan,
    params: Params,
) -> str:
    """The likelihood-threshold decider between the two inclusion rates."""
    ll_yes = response_log_likelihood(response, plan, params.p, params.epsilon, params.n)
    ll_no = response_log_likelihood(response, plan, params.q, params.epsilon, params.n)
    return YES if ll_yes >= ll_no else NO
