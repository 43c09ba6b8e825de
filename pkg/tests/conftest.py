import itertools

import pytest

from dmuss import WORKED_EXAMPLE_SETS, AccessStructure, validate_access_structure, worked_example_scheme


def structures(K, N):
    """Every access structure with K users over N nodes, up to node relabeling.

    A structure is a multiset of node types, a type being the nonempty set of
    users reading that node.
    """
    types = [frozenset(s) for r in range(1, K + 1) for s in itertools.combinations(range(1, K + 1), r)]
    for combo in itertools.combinations_with_replacement(types, N):
        sets = [frozenset(n + 1 for n, t in enumerate(combo) if k in t) for k in range(1, K + 1)]
        yield AccessStructure(tuple(sets), N)


def small_grid(k_max, n_max):
    for K in range(1, k_max + 1):
        for N in range(1, n_max + 1):
            yield from structures(K, N)


@pytest.fixture
def worked():
    return validate_access_structure(WORKED_EXAMPLE_SETS)


@pytest.fixture
def fixture_scheme():
    return worked_example_scheme()


@pytest.fixture
def weak_example():
    return validate_access_structure([[1, 2, 3], [3, 4]])


_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None or not (report.when == "call" or report.failed):
        return
    number, label = marker
    detail = next((line.split("  ", 1)[-1] for line in report.capstdout.splitlines()
                   if line.startswith(f"criterion {number}:")), "")
    _CRITERIA[number] = (label, "FAIL" if report.failed else "PASS", detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("criterion")
    if m is not None:
        outcome.get_result().criterion = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        label, verdict, detail = _CRITERIA[number]
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {number}: {verdict}  {label}{suffix}")
