"""Two independent certificates for a scheme.

``certify_ranks`` works on the matrices: support of each decoding map, ranks
of the decoding blocks, and the rank of the block that protects each user's
view.  ``entropy_oracle`` never looks at ranks; it enumerates every share
vector, evaluates the messages, and counts.  Because all shares are uniform
and every message is linear in them, each conditional distribution is uniform
on its support, so every entropy (base q) is the log of an integer count and
all comparisons are exact.

Checks that mean the same thing carry the same name in both reports, so the
two verdicts can be compared check by check.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import TooLarge
from .galois import FieldMatrix, mat_mul, rank, submatrix
from .synthesis import DmussScheme

DEFAULT_MAX_STATES = 10 ** 6


@dataclass(frozen=True)
class Check:
    name: str
    expected: object
    observed: object
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "expected": self.expected, "observed": self.observed, "pass": self.passed}


@dataclass(frozen=True)
class VerificationReport:
    mode: str
    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self) -> set[str]:
        return {c.name for c in self.checks}

    def to_dict(self) -> dict:
        return {"mode": self.mode, "pass": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _check(name, expected, observed) -> Check:
    return Check(name, expected, observed, expected == observed)


def certify_ranks(s: DmussScheme) -> VerificationReport:
    K, N, M = s.user_count, s.node_count, s.message_count
    checks = []
    block = s.decoding_block()
    for k in range(1, K + 1):
        v = s.decoding[k - 1]
        outside = [n for n in s.access.nodes if n not in s.access.access(k)]
        stray = sum(1 for n in outside for e in v.row(n - 1) if e)
        checks.append(_check(f"correctness[{k}]", 0, stray))
    for k in range(1, K + 1):
        checks.append(_check(f"rate[{k}]", s.rates[k - 1], rank(s.decoding[k - 1])))
    if K > 1:
        for k in range(1, K + 1):
            rows = [n - 1 for n in s.access.nodes if n not in s.access.access(k)]
            cols = [c for i in range(1, K + 1) if i != k
                    for c in range(s.message_offset(i), s.message_offset(i) + s.rates[i - 1])]
            protect = submatrix(block, rows, cols)
            checks.append(_check(f"privacy[{k}]", len(cols), rank(protect)))
    checks.append(_check("independence", M, rank(block)))
    checks.extend(_encoding_checks(s, block))
    return VerificationReport("ranks", tuple(checks))


def _encoding_checks(s: DmussScheme, block: FieldMatrix) -> list[Check]:
    N, M = s.node_count, s.message_count
    enc = s.encoding
    if enc is None or enc.shape != (N, N) or s.key_count != N - M:
        observed = "missing" if enc is None else f"shape {enc.rows}x{enc.cols}, {s.key_count} keys"
        return [Check("encoding", f"{N}x{N}, {N - M} keys", observed, False)]
    # each unit coordinate vector, pushed through encoding then decoding
    through = mat_mul(enc, block)
    bad_messages = sum(
        1 for i in range(M) if list(through.row(i)) != [int(i == j) for j in range(M)]
    )
    bad_keys = sum(1 for i in range(M, N) if any(through.row(i)))
    return [
        _check("encoding[messages]", 0, bad_messages),
        _check("encoding[keys]", 0, bad_keys),
    ]


class _ShareSpace:
    """All ``q**N`` share vectors, with lazily computed share/message columns."""

    def __init__(self, s: DmussScheme):
        self.q = s.q
        self.states = s.q ** s.node_count
        self._index = np.arange(self.states, dtype=np.int64)
        self._shares: dict[int, np.ndarray] = {}
        self._messages: dict[int, np.ndarray] = {}
        self._block = np.array(s.decoding_block().to_rows(), dtype=np.int64).reshape(s.node_count, s.message_count)
        self.N = s.node_count

    def share(self, n: int) -> np.ndarray:
        if n not in self._shares:
            self._shares[n] = (self._index // self.q ** (n - 1)) % self.q
        return self._shares[n]

    def message(self, c: int) -> np.ndarray:
        if c not in self._messages:
            acc = np.zeros(self.states, dtype=np.int64)
            for n in range(1, self.N + 1):
                coef = int(self._block[n - 1, c])
                if coef:
                    acc = (acc + coef * self.share(n)) % self.q
            self._messages[c] = acc
        return self._messages[c]

    def code(self, columns: Sequence[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.states, dtype=np.int64)
        for col in columns:
            out = out * self.q + col
        return out

    def conditional_entropy(self, target: Sequence[np.ndarray], given: Sequence[np.ndarray]):
        """``H(target | given)`` in base q.

        Returns ``(value, uniform)``.  When every conditional slice is uniform
        over a support of the same size ``q**t``, value is the integer ``t``;
        otherwise it is the floating-point entropy and ``uniform`` is False.
        """
        width = self.q ** len(target)
        joint = self.code(given) * width + self.code(target)
        pairs, counts = np.unique(joint, return_counts=True)
        slices = pairs // width
        starts = np.flatnonzero(np.r_[True, slices[1:] != slices[:-1]])
        sizes = np.diff(np.r_[starts, len(slices)])
        uniform = bool(np.all(np.minimum.reduceat(counts, starts) == np.maximum.reduceat(counts, starts)))
        if uniform and np.all(sizes == sizes[0]):
            size, t = int(sizes[0]), 0
            while self.q ** t < size:
                t += 1
            if self.q ** t == size:
                return t, True
        # general fallback: exact slice probabilities, float entropy
        total = self.states
        slice_totals: dict[int, int] = {}
        for z, c in zip(slices.tolist(), counts.tolist()):
            slice_totals[z] = slice_totals.get(z, 0) + c
        h = 0.0
        for z, c in zip(slices.tolist(), counts.tolist()):
            h -= (c / total) * math.log(c / slice_totals[z], self.q)
        return h, False


def max_states_default() -> int:
    value = os.environ.get("DMUSS_MAX_STATES")
    return int(value) if value else DEFAULT_MAX_STATES


def entropy_oracle(s: DmussScheme, max_states: int | None = None) -> VerificationReport:
    if max_states is None:
        max_states = max_states_default()
    states = s.q ** s.node_count
    if states > max_states:
        raise TooLarge(states, max_states)
    space = _ShareSpace(s)
    K, M = s.user_count, s.message_count
    a = s.access

    def cols(users):
        return [space.message(c) for i in users
                for c in range(s.message_offset(i), s.message_offset(i) + s.rates[i - 1])]

    def shares(nodes):
        return [space.share(n) for n in sorted(nodes)]

    checks = []

    def entropy_check(name, expected, target, given):
        value, uniform = space.conditional_entropy(target, given)
        checks.append(Check(name, expected, value, uniform and value == expected))

    for k in range(1, K + 1):
        entropy_check(f"correctness[{k}]", 0, cols([k]), shares(a.access(k)))
    for k in range(1, K + 1):
        entropy_check(f"rate[{k}]", s.rates[k - 1], cols([k]), [])
    if K > 1:
        for k in range(1, K + 1):
            others = [i for i in range(1, K + 1) if i != k]
            entropy_check(f"privacy[{k}]", sum(s.rates[i - 1] for i in others), cols(others), shares(a.access(k)))
    entropy_check("independence", M, cols(range(1, K + 1)), [])
    for n in a.nodes:
        entropy_check(f"share[{n}]", 1, [space.share(n)], [])

    report = VerificationReport("entropy", tuple(checks))
    names = [c for c in report.checks if c.name.startswith(("correctness", "privacy"))]
    if all(c.passed for c in names) and K > 1 and not report["independence"].passed:
        raise AssertionError("correct and private scheme with dependent messages")
    return report


def shared_failures(ranks: VerificationReport, entropy: VerificationReport) -> tuple[set[str], set[str]]:
    """Failing check names restricted to checks both reports carry."""
    common = ranks.names() & entropy.names()
    return (
        {n for n in ranks.failures() if n in common},
        {n for n in entropy.failures() if n in common},
    )


def merge_reports(*reports: VerificationReport) -> VerificationReport:
    mode = "+".join(r.mode for r in reports)
    return VerificationReport(mode, tuple(
        Check(f"{r.mode}:{c.name}", c.expected, c.observed, c.passed) for r in reports for c in r.checks
    ))
