"""Construction of linear multi-user secret sharing schemes.

The generator has an identity share block, so every share is an independent
uniform symbol and each message is a fixed linear combination of the shares
its user can read.  Message ``W_k`` owns ``R_k`` columns whose entries are
free indeterminates on the rows of ``A_k`` and zero elsewhere.  Privacy
against user ``k`` reduces to one square sub-block ``E_k`` being nonsingular;
the match plan guarantees each ``det(E_k)`` is a nonzero polynomial, and a
random assignment over a field with more than ``K`` elements makes all of
them nonzero at once with good probability.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import AssignmentExhausted, CapacityViolation, SynthesisFailed
from .galois import (
    Field,
    FieldMatrix,
    determinant,
    hstack,
    make_field,
    pivot_reduce,
    smallest_prime_greater_than,
    submatrix,
)
from .matching import MatchPlan, find_match_plan
from .topology import AccessStructure, check_perfect_capacity, validate_rates

log = logging.getLogger(__name__)

DEFAULT_RETRY_BUDGET = 64
DEFAULT_EXHAUSTIVE_THRESHOLD = 2 ** 20

# (user k, node row n, column c within W_k), all 1-based
Var = tuple[int, int, int]


@dataclass(frozen=True)
class SymbolicGenerator:
    """Message block of the generator as a grid of ``None`` (structural zero)
    or :data:`Var`.  The share block is the implicit ``N x N`` identity."""

    n_rows: int
    rates: tuple[int, ...]
    message_block: tuple[tuple[Var | None, ...], ...]

    @property
    def message_count(self) -> int:
        return sum(self.rates)

    def columns_of(self, k: int) -> range:
        start = sum(self.rates[:k - 1])
        return range(start, start + self.rates[k - 1])

    def variables(self) -> list[Var]:
        return sorted(e for row in self.message_block for e in row if e is not None)

    def pattern(self) -> str:
        """Printable rendering, ``d<k>,<n>[.c]`` for variables and ``0`` for zeros."""
        def fmt(e):
            if e is None:
                return "0"
            k, n, c = e
            return f"d{k},{n}" if self.rates[k - 1] == 1 else f"d{k},{n}.{c}"
        rows = []
        for i, row in enumerate(self.message_block):
            ident = ["1" if j == i else "0" for j in range(self.n_rows)]
            rows.append(" ".join([fmt(e) for e in row] + ["|"] + ident))
        return "\n".join(rows)


def init_symbolic_generator(a: AccessStructure, rates: Sequence[int]) -> SymbolicGenerator:
    r = validate_rates(rates, a.user_count)
    rows = []
    for n in a.nodes:
        row = []
        for k in range(1, a.user_count + 1):
            inside = n in a.access(k)
            row.extend((k, n, c) if inside else None for c in range(1, r[k - 1] + 1))
        rows.append(tuple(row))
    return SymbolicGenerator(a.node_count, r, tuple(rows))


@dataclass(frozen=True)
class PrivacyBlock:
    """Square sub-block ``E_k``: rows ``union of C_i^k`` (1-based node
    indices, ascending), columns of every message other than ``W_k``."""

    k: int
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    entries: tuple[tuple[Var | None, ...], ...]
    transversal: tuple[Var, ...] = ()

    @property
    def side(self) -> int:
        return len(self.rows)

    def variables(self) -> list[Var]:
        return sorted({e for row in self.entries for e in row if e is not None})

    def instantiate(self, assignment: Mapping[Var, int], f: Field) -> FieldMatrix:
        return FieldMatrix.from_rows(
            f, [[0 if e is None else assignment[e] for e in row] for row in self.entries], len(self.cols)
        )

    def has_transversal(self) -> bool:
        """True when the recorded transversal is a full set of distinct
        variables, one per column, in pairwise distinct rows."""
        if len(self.transversal) != self.side or len(set(self.transversal)) != self.side:
            return False
        seen_rows, seen_cols = set(), set()
        for v in self.transversal:
            hits = [(i, j) for i, row in enumerate(self.entries) for j, e in enumerate(row) if e == v]
            if len(hits) != 1:
                return False
            i, j = hits[0]
            seen_rows.add(i)
            seen_cols.add(j)
        return len(seen_rows) == len(seen_cols) == self.side


def extract_privacy_blocks(g: SymbolicGenerator, plan: MatchPlan) -> list[PrivacyBlock]:
    K = len(g.rates)
    if K < 2:
        return []
    blocks = []
    for k in range(1, K + 1):
        others = [i for i in range(1, K + 1) if i != k]
        rows = tuple(sorted(n for i in others for n in plan.rows_for(k, i)))
        cols = tuple(c for i in others for c in g.columns_of(i))
        entries = tuple(tuple(g.message_block[n - 1][c] for c in cols) for n in rows)
        # matched rows of C_i^k taken in ascending order pair with W_i's columns
        transversal = []
        for i in others:
            for c, n in zip(range(1, g.rates[i - 1] + 1), sorted(plan.rows_for(k, i))):
                transversal.append((i, n, c))
        blocks.append(PrivacyBlock(k, rows, cols, entries, tuple(transversal)))
    return blocks


def correctness_block(g: SymbolicGenerator, a: AccessStructure) -> PrivacyBlock:
    """``R_1 x R_1`` block on the first rows of ``A_1`` for a single user.

    With one user there are no privacy blocks, yet ``V_{W_1}`` still needs
    full column rank; this block forces it.
    """
    r1 = g.rates[0]
    rows = tuple(sorted(a.access(1))[:r1])
    cols = tuple(g.columns_of(1))
    entries = tuple(tuple(g.message_block[n - 1][c] for c in cols) for n in rows)
    transversal = tuple((1, n, c) for c, n in enumerate(rows, start=1))
    return PrivacyBlock(1, rows, cols, entries, transversal)


def first_singular_block(blocks: Sequence[PrivacyBlock], assignment: Mapping[Var, int], f: Field) -> int | None:
    """User index of the first block with zero determinant, or ``None``."""
    for b in blocks:
        if determinant(b.instantiate(assignment, f)) == 0:
            return b.k
    return None


def block_variables(blocks: Sequence[PrivacyBlock]) -> list[Var]:
    return sorted({v for b in blocks for v in b.variables()})


def _search_assignment(g, blocks, f, seed, retry_budget, exhaustive_threshold):
    block_vars = block_variables(blocks)
    base = {v: 0 for v in g.variables()}
    failing = None
    for attempt in range(retry_budget):
        rng = np.random.default_rng([seed, attempt])
        draw = rng.integers(0, f.q, size=len(block_vars))
        assignment = dict(base)
        assignment.update(zip(block_vars, (int(x) for x in draw)))
        failing = first_singular_block(blocks, assignment, f)
        if failing is None:
            return assignment, attempt + 1
    if f.q ** len(block_vars) <= exhaustive_threshold:
        log.debug("random draws exhausted, enumerating %d assignments", f.q ** len(block_vars))
        for values in itertools.product(range(f.q), repeat=len(block_vars)):
            assignment = dict(base)
            assignment.update(zip(block_vars, values))
            failing = first_singular_block(blocks, assignment, f)
            if failing is None:
                return assignment, retry_budget + 1
    raise AssignmentExhausted(f.q, retry_budget, failing if failing is not None else 0)


def assign_indeterminates(
    g: SymbolicGenerator,
    blocks: Sequence[PrivacyBlock],
    f: Field,
    seed: int = 0,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    exhaustive_threshold: int = DEFAULT_EXHAUSTIVE_THRESHOLD,
) -> dict[Var, int]:
    """Values for every indeterminate such that all blocks are nonsingular.

    Block variables are drawn uniformly and independently, once per attempt,
    from a generator seeded by ``(seed, attempt)``; variables outside every
    block are zero.  If all draws fail and the block variables span at most
    ``exhaustive_threshold`` assignments, they are enumerated in
    lexicographic order instead.
    """
    return _search_assignment(g, blocks, f, seed, retry_budget, exhaustive_threshold)[0]


def decoding_matrices(g: SymbolicGenerator, assignment: Mapping[Var, int], f: Field) -> tuple[FieldMatrix, ...]:
    out = []
    for k in range(1, len(g.rates) + 1):
        cols = g.columns_of(k)
        rows = [[0 if row[c] is None else assignment[row[c]] for c in cols] for row in g.message_block]
        out.append(FieldMatrix.from_rows(f, rows, len(cols)))
    return tuple(out)


def derive_encoding(decoding_block: FieldMatrix, f: Field) -> tuple[FieldMatrix, int]:
    """Encoding matrix ``T`` with ``shares = (messages, keys) . T``.

    Row-reducing ``[V_W | I]`` onto the message columns turns ``V_W`` into an
    identity over zeros; the transformation lands in the share block.
    """
    n, m = decoding_block.shape
    reduced = pivot_reduce(hstack(decoding_block, FieldMatrix.identity(f, n)), list(range(m)))
    return submatrix(reduced, range(n), range(m, m + n)), n - m


@dataclass(frozen=True)
class DmussScheme:
    """A finished linear scheme.

    ``decoding[k - 1]`` is ``V_{W_k}`` (``N x R_k``): user ``k`` recovers
    ``W_k = Y . V_{W_k}``.  ``encoding`` maps the coordinate vector
    ``(W_1..W_K, keys)`` to the ``N`` shares.  ``encoding`` may be ``None``
    for a candidate whose decoding block is rank deficient.
    """

    field: Field
    access: AccessStructure
    rates: tuple[int, ...]
    decoding: tuple[FieldMatrix, ...]
    encoding: FieldMatrix | None
    key_count: int
    seed: int | None = None
    match_plan: MatchPlan | None = None
    retries: int = 0

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def node_count(self) -> int:
        return self.access.node_count

    @property
    def user_count(self) -> int:
        return self.access.user_count

    @property
    def message_count(self) -> int:
        return sum(self.rates)

    def decoding_block(self) -> FieldMatrix:
        return hstack(*self.decoding)

    def message_offset(self, k: int) -> int:
        return sum(self.rates[:k - 1])


def scheme_from_decoding(
    f: Field,
    a: AccessStructure,
    rates: Sequence[int],
    decoding: Sequence[FieldMatrix],
    **provenance,
) -> DmussScheme:
    """Wrap decoding matrices into a scheme, deriving the encoding when the
    decoding block has full column rank (otherwise ``encoding`` is ``None``)."""
    from .errors import RankDeficientTarget

    r = validate_rates(rates, a.user_count)
    decoding = tuple(decoding)
    try:
        encoding, keys = derive_encoding(hstack(*decoding), f)
    except RankDeficientTarget:
        encoding, keys = None, a.node_count - sum(r)
    return DmussScheme(f, a, r, decoding, encoding, keys, **provenance)


def synthesize(
    a: AccessStructure,
    rates: Sequence,
    q: int | None = None,
    seed: int = 0,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    exhaustive_threshold: int = DEFAULT_EXHAUSTIVE_THRESHOLD,
) -> DmussScheme:
    """Build and self-certify a scheme for an integral rate tuple.

    The default field is the smallest prime above the number of users, which
    guarantees a valid assignment exists.  Smaller fields may still work.
    """
    from .verification import certify_ranks

    r = validate_rates(rates, a.user_count, integral=True)
    violation = check_perfect_capacity(a, r, method="matching")
    if violation is not None:
        raise CapacityViolation(violation)
    f = make_field(q if q is not None else smallest_prime_greater_than(a.user_count))
    plan = find_match_plan(a, r)
    g = init_symbolic_generator(a, r)
    blocks = extract_privacy_blocks(g, plan)
    if a.user_count == 1:
        blocks = [correctness_block(g, a)]
    assignment, attempts = _search_assignment(g, blocks, f, seed, retry_budget, exhaustive_threshold)
    scheme = scheme_from_decoding(
        f, a, r, decoding_matrices(g, assignment, f), seed=seed, match_plan=plan, retries=attempts - 1
    )
    if scheme.key_count < 0 or scheme.encoding is None:
        raise SynthesisFailed(certify_ranks(scheme))
    report = certify_ranks(scheme)
    if not report.passed:
        raise SynthesisFailed(report)
    return scheme


def single_draw_success_rate(blocks: Sequence[PrivacyBlock], f: Field, trials: int, seed: int = 0) -> float:
    """Fraction of independent uniform draws making every block nonsingular."""
    block_vars = block_variables(blocks)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        assignment = dict(zip(block_vars, (int(x) for x in rng.integers(0, f.q, size=len(block_vars)))))
        if first_singular_block(blocks, assignment, f) is None:
            hits += 1
    return hits / trials if trials else 0.0


def success_lower_bound(blocks: Sequence[PrivacyBlock], f: Field) -> float:
    """``(1 - m/q)**v`` with ``v`` block variables and ``m`` the largest number
    of blocks any single variable appears in (its degree in the product of
    determinants)."""
    block_vars = block_variables(blocks)
    m = max((sum(1 for b in blocks if v in b.variables()) for v in block_vars), default=0)
    return max(0.0, 1 - m / f.q) ** len(block_vars)
