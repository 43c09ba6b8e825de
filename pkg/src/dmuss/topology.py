"""Access structures, rate tuples and capacity-region membership tests.

Two privacy notions are supported.  Under perfect privacy, user ``k`` must
learn nothing about the *joint* collection of the other messages; under weak
privacy only about each other message individually.  Both checkers return
``None`` for a feasible rate tuple and a :class:`Violation` naming the broken
inequality otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from numbers import Rational, Real
from typing import Iterable, Sequence

from .errors import InvalidRates, NonIntegralRate, NoUsers, TooManyUsers

ENUMERATION_USER_CAP = 20

PERFECT = "perfect"
SINGLE_USER = "single-user"
WEAK_INDIVIDUAL = "weak-individual"
WEAK_RESOURCE = "weak-resource"


@dataclass(frozen=True)
class AccessStructure:
    """Access sets ``A_1..A_K`` over canonical node labels ``1..N``.

    ``labels[n - 1]`` is the caller's original label of canonical node ``n``.
    """

    access_sets: tuple[frozenset[int], ...]
    node_count: int
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.access_sets:
            raise NoUsers("an access structure needs at least one user")
        covered = frozenset().union(*self.access_sets)
        if covered != frozenset(range(1, self.node_count + 1)):
            raise ValueError("access sets must cover exactly the nodes 1..N")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, self.node_count + 1)))
        if len(self.labels) != self.node_count:
            raise ValueError("label mapping must name every node")

    @property
    def user_count(self) -> int:
        return len(self.access_sets)

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    def access(self, k: int) -> frozenset[int]:
        """Access set of user ``k`` (1-based)."""
        return self.access_sets[k - 1]

    def sorted_sets(self) -> list[list[int]]:
        return [sorted(a) for a in self.access_sets]

    def union_minus(self, users: Iterable[int], k: int | None = None) -> frozenset[int]:
        """``(union of A_i for i in users) minus A_k``."""
        u = frozenset().union(*(self.access(i) for i in users))
        return u - self.access(k) if k is not None else u


def validate_access_structure(raw_sets: Sequence[Iterable[int]]) -> AccessStructure:
    if not raw_sets:
        raise NoUsers("an access structure needs at least one user")
    sets = []
    for s in raw_sets:
        items = list(s)
        for n in items:
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                raise ValueError(f"node labels must be positive integers, got {n!r}")
        sets.append(frozenset(items))
    labels = sorted(frozenset().union(*sets))
    relabel = {old: new for new, old in enumerate(labels, start=1)}
    return AccessStructure(
        tuple(frozenset(relabel[n] for n in s) for s in sets), len(labels), tuple(labels)
    )


def _as_rational(x) -> Fraction:
    if isinstance(x, bool):
        raise InvalidRates(f"rate {x!r} is not a number")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, Real):
        if not math.isfinite(x):
            raise InvalidRates(f"rate {x!r} is not finite")
        # decimal reading keeps 0.1 as 1/10 rather than its binary expansion
        return Fraction(repr(float(x)))
    raise InvalidRates(f"rate {x!r} is not a number")


def validate_rates(rates: Sequence, user_count: int, integral: bool = True) -> tuple:
    """Canonical rate tuple: ints when integral, otherwise Fractions."""
    if len(rates) != user_count:
        raise InvalidRates(f"expected {user_count} rates, got {len(rates)}")
    values = [_as_rational(r) for r in rates]
    if any(v < 0 for v in values):
        raise InvalidRates("rates must be nonnegative")
    if all(v.denominator == 1 for v in values):
        return tuple(int(v) for v in values)
    if integral:
        raise NonIntegralRate(f"synthesis needs integral rates, got {list(rates)}")
    return tuple(values)


@dataclass(frozen=True)
class Violation:
    """One broken capacity inequality: ``lhs = sum of R_i over s`` exceeds ``rhs``.

    ``k`` is the user whose access set plays the colluding role (``None`` for
    the weak resource bound, which involves no colluder).
    """

    k: int | None
    s: tuple[int, ...]
    lhs: object
    rhs: int
    constraint: str = PERFECT

    def describe(self) -> str:
        s = "{" + ",".join(map(str, self.s)) + "}"
        if self.constraint == PERFECT:
            return f"sum R_i over S={s} is {self.lhs} > |union A_i over S minus A_{self.k}| = {self.rhs}"
        if self.constraint == SINGLE_USER:
            return f"R_{self.s[0]} = {self.lhs} > |A_{self.s[0]}| = {self.rhs}"
        if self.constraint == WEAK_INDIVIDUAL:
            return f"R_{self.s[0]} = {self.lhs} > |A_{self.s[0]} minus A_{self.k}| = {self.rhs}"
        return f"sum R_i over S={s} is {self.lhs} > |union A_i over S| = {self.rhs}"

    def to_dict(self) -> dict:
        lhs = self.lhs
        if isinstance(lhs, Fraction):
            lhs = int(lhs) if lhs.denominator == 1 else str(lhs)
        return {
            "k": self.k,
            "s": list(self.s),
            "lhs": lhs,
            "rhs": self.rhs,
            "constraint": self.constraint,
            "inequality": self.describe(),
        }

    def holds_for(self, a: AccessStructure, rates: Sequence) -> bool:
        """Recompute both sides from the inputs and confirm lhs > rhs."""
        lhs = sum(Fraction(_as_rational(rates[i - 1])) for i in self.s)
        if self.constraint in (PERFECT, WEAK_INDIVIDUAL):
            rhs = len(a.union_minus(self.s, self.k))
        else:
            rhs = len(a.union_minus(self.s))
        return lhs == self.lhs and rhs == self.rhs and lhs > rhs


def _violation_order(v: Violation):
    return (len(v.s), v.k if v.k is not None else 0, v.s)


def _single_user_check(a: AccessStructure, r: tuple) -> Violation | None:
    # no colluder exists for K = 1; the resource bound R_1 <= |A_1| still applies.
    if r[0] > len(a.access(1)):
        return Violation(1, (1,), r[0], len(a.access(1)), SINGLE_USER)
    return None


def _perfect_enumerate(a: AccessStructure, r: tuple) -> Violation | None:
    K = a.user_count
    if K > ENUMERATION_USER_CAP:
        raise TooManyUsers(f"enumeration is capped at {ENUMERATION_USER_CAP} users, got {K}")
    for size in range(1, K):
        for k in range(1, K + 1):
            others = [i for i in range(1, K + 1) if i != k]
            for s in combinations(others, size):
                lhs = sum(r[i - 1] for i in s)
                rhs = len(a.union_minus(s, k))
                if lhs > rhs:
                    return Violation(k, s, lhs, rhs)
    return None


def _perfect_matching(a: AccessStructure, r: tuple) -> Violation | None:
    from .matching import build_demand_graph, hall_violator, max_matching

    scale = math.lcm(*(Fraction(x).denominator for x in r))
    copies = tuple(int(x * scale) for x in r)
    found = []
    for k in range(1, a.user_count + 1):
        g = build_demand_graph(a, copies, k, node_capacity=scale)
        m = max_matching(g)
        if len(m) < len(g.left):
            v = hall_violator(g, m)
            lhs = sum(r[i - 1] for i in v.s)
            found.append(Violation(k, v.s, lhs, v.rhs))
    return min(found, key=_violation_order) if found else None


def check_perfect_capacity(a: AccessStructure, rates: Sequence, method: str = "matching") -> Violation | None:
    """Membership test for the perfect-privacy capacity region.

    Feasible iff for every user ``k`` and every nonempty ``S`` not containing
    ``k``: ``sum(R_i, i in S) <= |union(A_i, i in S) - A_k|``.  The
    ``enumerate`` method sweeps all ``(k, S)`` pairs; ``matching`` runs one
    Hall test per user.  When several inequalities fail, the one with the
    smallest ``S`` (then smallest ``k``, then lexicographic ``S``) is reported
    by ``enumerate``; ``matching`` reports the smallest certificate it finds.
    """
    r = validate_rates(rates, a.user_count, integral=False)
    if a.user_count == 1:
        return _single_user_check(a, r)
    if method == "enumerate":
        return _perfect_enumerate(a, r)
    if method == "matching":
        return _perfect_matching(a, r)
    raise ValueError(f"unknown method {method!r}")


def check_weak_capacity(a: AccessStructure, rates: Sequence) -> Violation | None:
    """Membership test for the weak-privacy capacity region."""
    r = validate_rates(rates, a.user_count, integral=False)
    K = a.user_count
    for k in range(1, K + 1):
        for kp in range(1, K + 1):
            if kp == k:
                continue
            rhs = len(a.access(k) - a.access(kp))
            if r[k - 1] > rhs:
                return Violation(kp, (k,), r[k - 1], rhs, WEAK_INDIVIDUAL)
    for size in range(1, K + 1):
        for s in combinations(range(1, K + 1), size):
            lhs = sum(r[i - 1] for i in s)
            rhs = len(a.union_minus(s))
            if lhs > rhs:
                return Violation(None, s, lhs, rhs, WEAK_RESOURCE)
    return None


def set_difference_bound(decoding_set: Iterable[int], colluding_set: Iterable[int]) -> int:
    """Unit-share upper bound on a secret decodable from ``decoding_set`` but
    hidden from ``colluding_set``: the number of non-colluding decoding shares."""
    return len(set(decoding_set) - set(colluding_set))
