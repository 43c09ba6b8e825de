"""Placement and retrieval for a synthesized scheme.

A payload of block length ``L`` is handled column by column: column ``l``
of every message block, together with fresh keys, forms one coordinate
vector that the encoding matrix turns into column ``l`` of every share.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch
from .synthesis import DmussScheme


def _grid(rows, q: int, what: str) -> tuple[tuple[int, ...], ...]:
    out = tuple(tuple(int(x) for x in r) for r in rows)
    if any(not 0 <= x < q for r in out for x in r):
        raise DimensionMismatch(f"{what} entries must lie in [0, {q})")
    return out


@dataclass(frozen=True)
class Payload:
    """Message blocks ``W_1..W_K``; block ``k`` is ``R_k`` rows of length ``L``."""

    q: int
    blocks: tuple[tuple[tuple[int, ...], ...], ...]
    length: int

    @classmethod
    def from_blocks(cls, q: int, blocks: Sequence[Sequence[Sequence[int]]], length: int | None = None):
        grids = tuple(_grid(b, q, "payload") for b in blocks)
        lengths = {len(r) for g in grids for r in g}
        if length is None:
            if len(lengths) > 1:
                raise DimensionMismatch("message blocks have different lengths")
            length = lengths.pop() if lengths else 1
        elif lengths - {length}:
            raise DimensionMismatch(f"message rows must all have length {length}")
        return cls(q, grids, length)

    @property
    def rates(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def coordinates(self) -> np.ndarray:
        """``L x M`` array, row ``l`` holding column ``l`` of every message."""
        rows = [r for b in self.blocks for r in b]
        if not rows:
            return np.zeros((self.length, 0), dtype=np.int64)
        return np.array(rows, dtype=np.int64).reshape(len(rows), self.length).T


@dataclass(frozen=True)
class ShareSet:
    """Share streams for ``nodes`` (ascending, 1-based); row ``i`` belongs to ``nodes[i]``."""

    q: int
    rows: tuple[tuple[int, ...], ...]
    nodes: tuple[int, ...]
    length: int

    @classmethod
    def from_rows(cls, q: int, rows, nodes: Sequence[int] | None = None, length: int | None = None):
        grid = _grid(rows, q, "share")
        nodes = tuple(range(1, len(grid) + 1)) if nodes is None else tuple(int(n) for n in nodes)
        if len(nodes) != len(grid):
            raise DimensionMismatch(f"{len(grid)} share rows for {len(nodes)} nodes")
        if list(nodes) != sorted(set(nodes)):
            raise DimensionMismatch("share rows must be listed in ascending node order")
        lengths = {len(r) for r in grid}
        if length is None:
            length = lengths.pop() if len(lengths) == 1 else (1 if not lengths else None)
            if length is None:
                raise DimensionMismatch("share rows have different lengths")
        elif lengths - {length}:
            raise DimensionMismatch(f"share rows must all have length {length}")
        return cls(q, grid, nodes, length)

    def restrict(self, nodes) -> ShareSet:
        """Rows for the given nodes, ascending."""
        index = {n: i for i, n in enumerate(self.nodes)}
        wanted = sorted(nodes)
        missing = [n for n in wanted if n not in index]
        if missing:
            raise DimensionMismatch(f"no share rows for nodes {missing}")
        return ShareSet(self.q, tuple(self.rows[index[n]] for n in wanted), tuple(wanted), self.length)


def place(s: DmussScheme, p: Payload, key_source) -> ShareSet:
    """Encode a payload into ``N`` share streams.

    ``key_source`` is either a ``numpy.random.Generator`` (keys drawn
    uniformly, one key vector per column in column order) or an explicit
    ``key_count x L`` block.
    """
    if p.q != s.q:
        raise DimensionMismatch(f"payload over GF({p.q}) for a scheme over GF({s.q})")
    if p.rates != s.rates:
        raise DimensionMismatch(f"payload block sizes {list(p.rates)} do not match rates {list(s.rates)}")
    if s.encoding is None:
        raise DimensionMismatch("scheme has no encoding matrix")
    L = p.length
    if isinstance(key_source, np.random.Generator):
        keys = key_source.integers(0, s.q, size=(L, s.key_count), dtype=np.int64)
    else:
        grid = _grid(key_source, s.q, "key")
        if len(grid) != s.key_count or any(len(r) != L for r in grid):
            raise DimensionMismatch(f"key block must be {s.key_count} x {L}")
        keys = np.array(grid, dtype=np.int64).reshape(s.key_count, L).T
    x = np.hstack([p.coordinates(), keys])
    enc = np.array(s.encoding.to_rows(), dtype=np.int64).reshape(s.node_count, s.node_count)
    y = (x @ enc) % s.q
    return ShareSet(s.q, tuple(tuple(int(v) for v in col) for col in y.T), tuple(s.access.nodes), L)


def retrieve(s: DmussScheme, k: int, shares_on_access_set) -> tuple[tuple[int, ...], ...]:
    """Recover ``W_k`` (``R_k x L``) from the rows of ``A_k`` only, ascending node order.

    Accepts a :class:`ShareSet` (restricted to ``A_k`` automatically) or a
    plain ``|A_k| x L`` grid.
    """
    if not 1 <= k <= s.user_count:
        raise DimensionMismatch(f"user {k} outside 1..{s.user_count}")
    access = sorted(s.access.access(k))
    if isinstance(shares_on_access_set, ShareSet):
        grid = shares_on_access_set.restrict(access).rows
    else:
        grid = _grid(shares_on_access_set, s.q, "share")
    if len(grid) != len(access):
        raise DimensionMismatch(f"user {k} reads {len(access)} shares, got {len(grid)} rows")
    lengths = {len(r) for r in grid}
    if len(lengths) > 1:
        raise DimensionMismatch("share rows have different lengths")
    L = lengths.pop() if lengths else 0
    v = s.decoding[k - 1]
    coeff = np.array([v.row(n - 1) for n in access], dtype=np.int64).reshape(len(access), v.cols)
    y = np.array(grid, dtype=np.int64).reshape(len(access), L)
    w = (coeff.T @ y) % s.q
    return tuple(tuple(int(x) for x in row) for row in w)
