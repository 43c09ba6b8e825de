import itertools
import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmuss import certify_ranks, entropy_oracle, synthesize, validate_access_structure
from dmuss.errors import TooLarge
from dmuss.galois import FieldMatrix, make_field
from dmuss.synthesis import DmussScheme, scheme_from_decoding
from dmuss.topology import AccessStructure, check_perfect_capacity, set_difference_bound
from dmuss.verification import merge_reports, shared_failures
from strategies import feasible_problems, problems


def tamper(s, k, node, col=0, value=0):
    decoding = list(s.decoding)
    decoding[k - 1] = decoding[k - 1].replace(node - 1, col, value)
    return scheme_from_decoding(s.field, s.access, s.rates, decoding)


def naive_conditional_entropy(s, target_users, given_nodes):
    """Shannon entropy in base q by plain dictionaries over all share vectors."""
    q, N = s.q, s.node_count
    joint, marginal = Counter(), Counter()
    for y in itertools.product(range(q), repeat=N):
        w = tuple(
            sum(y[n] * s.decoding[k - 1][n, c] for n in range(N)) % q
            for k in target_users for c in range(s.rates[k - 1])
        )
        seen = tuple(y[n - 1] for n in sorted(given_nodes))
        joint[(seen, w)] += 1
        marginal[seen] += 1
    total = q ** N
    h = -sum(c / total * math.log(c / marginal[g], q) for (g, _), c in joint.items())
    return h


class TestRankCertifier:
    def test_fixture_passes(self, fixture_scheme):
        r = certify_ranks(fixture_scheme)
        assert r.passed and r.failures() == []
        assert r.names() >= {f"privacy[{k}]" for k in range(1, 5)}

    def test_zeroed_entry_breaks_privacy_for_user_4(self, fixture_scheme):
        t = tamper(fixture_scheme, 2, 2)
        r = certify_ranks(t)
        assert "privacy[4]" in r.failures()
        assert r["privacy[4]"].observed == 2

    def test_entry_outside_access_set(self, fixture_scheme):
        # node 3 is not in A_1
        t = tamper(fixture_scheme, 1, 3, value=1)
        assert "correctness[1]" in certify_ranks(t).failures()

    def test_single_user_trivial(self):
        f = make_field(2)
        a = validate_access_structure([[1]])
        s = scheme_from_decoding(f, a, [1], [FieldMatrix.from_rows(f, [[1]])])
        r = certify_ranks(s)
        assert r.passed
        assert not any(n.startswith("privacy") for n in r.names())

    def test_inconsistent_encoding(self, fixture_scheme):
        enc = fixture_scheme.encoding.replace(0, 0, 0)
        bad = DmussScheme(fixture_scheme.field, fixture_scheme.access, fixture_scheme.rates,
                          fixture_scheme.decoding, enc, fixture_scheme.key_count)
        assert "encoding[messages]" in certify_ranks(bad).failures()

    def test_missing_encoding(self, fixture_scheme):
        bad = DmussScheme(fixture_scheme.field, fixture_scheme.access, fixture_scheme.rates,
                          fixture_scheme.decoding, None, fixture_scheme.key_count)
        r = certify_ranks(bad)
        assert r.failures() == ["encoding"]

    def test_report_serializes(self, fixture_scheme):
        doc = certify_ranks(fixture_scheme).to_dict()
        assert doc["mode"] == "ranks" and doc["pass"] is True
        assert {"name", "expected", "observed", "pass"} <= set(doc["checks"][0])

    def test_report_lookup(self, fixture_scheme):
        with pytest.raises(KeyError):
            certify_ranks(fixture_scheme)["nope"]


class TestEntropyOracle:
    def test_fixture_values(self, fixture_scheme):
        r = entropy_oracle(fixture_scheme)
        assert r.passed
        for k in range(1, 5):
            assert r[f"correctness[{k}]"].observed == 0
            assert r[f"privacy[{k}]"].observed == 3
        assert r["independence"].observed == 4
        assert all(r[f"share[{n}]"].observed == 1 for n in range(1, 7))

    def test_against_naive_entropy(self, fixture_scheme):
        s = fixture_scheme
        for k in range(1, 5):
            others = [i for i in range(1, 5) if i != k]
            assert naive_conditional_entropy(s, [k], s.access.access(k)) == pytest.approx(0, abs=1e-12)
            assert naive_conditional_entropy(s, others, s.access.access(k)) == pytest.approx(3)

    def test_tampered_fixture(self, fixture_scheme):
        t = tamper(fixture_scheme, 2, 2)
        r = entropy_oracle(t)
        assert "privacy[4]" in r.failures()
        # tampered value is a genuine entropy, and agrees with plain counting
        assert r["privacy[4]"].observed == pytest.approx(
            naive_conditional_entropy(t, [1, 2, 3], t.access.access(4)))

    def test_too_large(self):
        a = AccessStructure(tuple(frozenset({n}) for n in range(1, 11)), 10)
        f = make_field(5)
        s = scheme_from_decoding(f, a, [0] * 10, [FieldMatrix.zeros(f, 10, 0)] * 10)
        with pytest.raises(TooLarge) as info:
            entropy_oracle(s, max_states=10 ** 6)
        assert info.value.states == 5 ** 10

    def test_environment_cap(self, fixture_scheme, monkeypatch):
        monkeypatch.setenv("DMUSS_MAX_STATES", "10")
        with pytest.raises(TooLarge):
            entropy_oracle(fixture_scheme)

    def test_shared_names(self, fixture_scheme):
        ranks, ent = certify_ranks(fixture_scheme), entropy_oracle(fixture_scheme)
        common = ranks.names() & ent.names()
        assert {"independence", "correctness[1]", "privacy[1]", "rate[1]"} <= common
        assert shared_failures(ranks, ent) == (set(), set())

    def test_merge(self, fixture_scheme):
        merged = merge_reports(certify_ranks(fixture_scheme), entropy_oracle(fixture_scheme))
        assert merged.passed and merged.mode == "ranks+entropy"
        assert "entropy:share[6]" in merged.names()


def _tamperings(s):
    for k, v in enumerate(s.decoding, 1):
        for n in range(1, s.node_count + 1):
            for c in range(v.cols):
                for value in range(s.q):
                    if value != v[n - 1, c]:
                        yield tamper(s, k, n, c, value)


@settings(max_examples=40, deadline=None)
@given(feasible_problems(max_users=4, max_nodes=5, max_rate=2), st.integers(0, 1000))
def test_verifiers_agree_on_arbitrary_edits(problem, seed):
    """Any single-entry change, including entries outside the access sets."""
    a, r = problem
    if check_perfect_capacity(a, r) is not None:
        return
    s = synthesize(a, r, seed=seed)
    if s.q ** s.node_count > 5 ** 5:
        return
    for t in itertools.islice(_tamperings(s), 60):
        ranks, ent = certify_ranks(t), entropy_oracle(t)
        fr, fe = shared_failures(ranks, ent)
        assert fr == fe
        assert ranks.passed == ent.passed


@settings(max_examples=60, deadline=None)
@given(feasible_problems(max_users=4, max_nodes=6, max_rate=3))
def test_converse_consistency(problem):
    """Passing schemes never beat the set-difference bound."""
    a, r = problem
    if check_perfect_capacity(a, r) is not None:
        return
    s = synthesize(a, r)
    assert certify_ranks(s).passed
    K = a.user_count
    for k in range(1, K + 1):
        others = [i for i in range(1, K + 1) if i != k]
        for size in range(1, len(others) + 1):
            for subset in itertools.combinations(others, size):
                union = a.union_minus(subset)
                assert sum(r[i - 1] for i in subset) <= set_difference_bound(union, a.access(k))
