"""Per-user demand graphs, Hopcroft-Karp matching and Hall certificates.

For user ``k`` the left side holds ``R_i`` copies ``(i, j)`` of every other
message ``i``; copy ``(i, j)`` is adjacent to the nodes of ``A_i - A_k``.  A
left-perfect matching picks, for each message ``i``, ``R_i`` distinct rows
``C_i^k`` that user ``k`` cannot read, pairwise disjoint across messages.
When no such matching exists, the alternating-path closure of the unmatched
copies names a family of messages violating the capacity bound.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ImperfectMatching, InvalidMatchPlan, PerfectMatching
from .topology import AccessStructure, Violation, validate_rates

_INF = float("inf")


@dataclass(frozen=True)
class DemandGraph:
    excluded_user: int
    left: tuple[tuple[int, int], ...]
    right: tuple
    adjacency: Mapping[tuple[int, int], tuple]
    node_capacity: int = 1

    def neighbors(self, u: tuple[int, int]) -> tuple:
        return self.adjacency[u]

    def node_of(self, v) -> int:
        return v if self.node_capacity == 1 else v[0]

    def copies(self, i: int) -> int:
        return sum(1 for (m, _) in self.left if m == i)


def build_demand_graph(a: AccessStructure, rates: Sequence[int], k: int, node_capacity: int = 1) -> DemandGraph:
    """Demand graph for user ``k``.

    With ``node_capacity > 1`` every node is split into that many right
    vertices ``(n, t)``; this is how the capacity checker handles rational
    rates after scaling them to integers.
    """
    if not 1 <= k <= a.user_count:
        raise ValueError(f"user {k} outside 1..{a.user_count}")
    r = validate_rates(rates, a.user_count)
    left, adjacency = [], {}
    for i in range(1, a.user_count + 1):
        if i == k:
            continue
        nodes = sorted(a.access(i) - a.access(k))
        if node_capacity == 1:
            nbrs = tuple(nodes)
        else:
            nbrs = tuple((n, t) for n in nodes for t in range(node_capacity))
        for j in range(1, r[i - 1] + 1):
            left.append((i, j))
            adjacency[(i, j)] = nbrs
    if node_capacity == 1:
        right = tuple(a.nodes)
    else:
        right = tuple((n, t) for n in a.nodes for t in range(node_capacity))
    return DemandGraph(k, tuple(left), right, adjacency, node_capacity)


def max_matching(g: DemandGraph) -> dict:
    """Maximum matching by Hopcroft-Karp, as an ordered ``left -> right`` dict.

    Left vertices are processed in ascending ``(i, j)`` order and neighbor
    scans run in ascending node order, so the result is deterministic.
    """
    pair_left = {u: None for u in g.left}
    pair_right = {}
    dist = {}

    def bfs() -> bool:
        queue = deque()
        for u in g.left:
            if pair_left[u] is None:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = _INF
        found = False
        while queue:
            u = queue.popleft()
            for v in g.adjacency[u]:
                w = pair_right.get(v)
                if w is None:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(root) -> bool:
        # iterative layered augmenting-path search
        stack = [(root, iter(g.adjacency[root]))]
        path = []
        while stack:
            u, it = stack[-1]
            advanced = False
            for v in it:
                w = pair_right.get(v)
                if w is None:
                    path.append((u, v))
                    for pu, pv in path:
                        pair_left[pu] = pv
                        pair_right[pv] = pu
                    return True
                if dist[w] == dist[u] + 1:
                    path.append((u, v))
                    stack.append((w, iter(g.adjacency[w])))
                    advanced = True
                    break
            if not advanced:
                dist[u] = _INF
                stack.pop()
                if path:
                    path.pop()
        return False

    while bfs():
        for u in g.left:
            if pair_left[u] is None:
                dfs(u)
    return {u: v for u, v in pair_left.items() if v is not None}


def hall_violator(g: DemandGraph, m: Mapping) -> Violation:
    """Turn a non-perfect maximum matching into a violated capacity inequality.

    The left vertices reachable from unmatched copies along alternating paths
    have fewer neighbors than members; the messages they belong to form ``S``.
    """
    unmatched = [u for u in g.left if u not in m]
    if not unmatched:
        raise PerfectMatching(f"matching for user {g.excluded_user} is left-perfect")
    partner = {v: u for u, v in m.items()}
    seen = set(unmatched)
    queue = deque(unmatched)
    while queue:
        u = queue.popleft()
        for v in g.adjacency[u]:
            w = partner.get(v)
            if w is None:
                raise ValueError("matching is not maximum: augmenting path found")
            if w not in seen:
                seen.add(w)
                queue.append(w)
    s = tuple(sorted({i for (i, _) in seen}))
    nodes = {g.node_of(v) for i in s for v in g.adjacency[(i, 1)]}
    lhs = Fraction(sum(g.copies(i) for i in s), g.node_capacity)
    lhs = int(lhs) if lhs.denominator == 1 else lhs
    return Violation(g.excluded_user, s, lhs, len(nodes))


@dataclass(frozen=True)
class MatchPlan:
    """Row-index sets ``C_i^k`` keyed by ``(k, i)``."""

    sets: Mapping[tuple[int, int], frozenset[int]] = field(default_factory=dict)

    def rows_for(self, k: int, i: int) -> frozenset[int]:
        return self.sets[(k, i)]

    def users(self) -> list[int]:
        return sorted({k for k, _ in self.sets})

    def to_dict(self) -> dict:
        out: dict[str, dict[str, list[int]]] = {}
        for (k, i), nodes in sorted(self.sets.items()):
            out.setdefault(str(k), {})[str(i)] = sorted(nodes)
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> MatchPlan:
        return cls({(int(k), int(i)): frozenset(v) for k, row in d.items() for i, v in row.items()})


def validate_match_plan(a: AccessStructure, rates: Sequence[int], plan: MatchPlan) -> None:
    """Raise :class:`InvalidMatchPlan` unless every ``C_i^k`` is inside
    ``A_i - A_k``, has exactly ``R_i`` rows, and is disjoint from its siblings."""
    r = validate_rates(rates, a.user_count)
    K = a.user_count
    for k in range(1, K + 1):
        used: dict[int, int] = {}
        for i in range(1, K + 1):
            if i == k:
                continue
            c = plan.sets.get((k, i))
            if c is None:
                raise InvalidMatchPlan(f"C_{i}^{k} missing")
            outside = c - (a.access(i) - a.access(k))
            if outside:
                raise InvalidMatchPlan(
                    f"C_{i}^{k} has rows {sorted(outside)} outside A_{i} minus A_{k}"
                )
            if len(c) != r[i - 1]:
                raise InvalidMatchPlan(f"|C_{i}^{k}| = {len(c)} but R_{i} = {r[i - 1]}")
            for n in c:
                if n in used:
                    raise InvalidMatchPlan(f"row {n} shared by C_{used[n]}^{k} and C_{i}^{k}")
                used[n] = i


def extract_match_plan(a: AccessStructure, rates: Sequence[int], matchings: Mapping[int, Mapping]) -> MatchPlan:
    r = validate_rates(rates, a.user_count)
    sets = {}
    for k in range(1, a.user_count + 1):
        m = matchings[k]
        demand = [(i, j) for i in range(1, a.user_count + 1) if i != k for j in range(1, r[i - 1] + 1)]
        missing = [u for u in demand if u not in m]
        if missing:
            raise ImperfectMatching(k, missing)
        for i in range(1, a.user_count + 1):
            if i != k:
                sets[(k, i)] = frozenset(m[(i, j)] for j in range(1, r[i - 1] + 1))
    plan = MatchPlan(sets)
    validate_match_plan(a, r, plan)
    return plan


def find_match_plan(a: AccessStructure, rates: Sequence[int]) -> MatchPlan:
    """Match every user; raises :class:`ImperfectMatching` on the first failure."""
    matchings = {k: max_matching(build_demand_graph(a, rates, k)) for k in range(1, a.user_count + 1)}
    return extract_match_plan(a, rates, matchings)
