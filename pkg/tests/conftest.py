"""Roll acceptance-test outcomes up into one PASS/FAIL line per criterion."""

import time
from collections import defaultdict

CRITERIA = {
    1: "node conservation on 1000 random pairs, under 5 s",
    2: "degenerate theta: union at 1.0, full merge on identity alignment",
    3: "merged count and bias rates monotone in theta",
    4: "forest construction byte-equal to the brute-force oracle",
    5: "merge report identity and engineered corpus row",
    6: "syntactic distance equals BFS oracle",
    7: "encoder attention, equivariance, uniform zero-params, seed stability",
    8: "CoNLL-U round trip and forest schema validation",
    9: "toy goldens byte-identical, full suite under 60 s",
}
SUITE_BUDGET = 60.0

_criterion_of = {}
_outcomes = defaultdict(list)
_started = [0.0]


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_sessionstart(session):
    _started[0] = time.perf_counter()


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _criterion_of[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    k = _criterion_of.get(report.nodeid)
    if k is None:
        return
    if report.when == "call":
        _outcomes[k].append(report.passed)
    elif report.failed or report.skipped:
        _outcomes[k].append(False)


def pytest_terminal_summary(terminalreporter):
    if not _criterion_of:
        return
    elapsed = time.perf_counter() - _started[0]
    terminalreporter.write_sep("=", "acceptance criteria")
    for k, name in CRITERIA.items():
        results = _outcomes.get(k, [])
        ok = bool(results) and all(results)
        extra = ""
        if k == 9:
            ok = ok and elapsed < SUITE_BUDGET
            extra = f", suite {elapsed:.1f}s"
        terminalreporter.write_line(f"AC{k} {'PASS' if ok else 'FAIL'}  {name} "
                                    f"({sum(results)}/{len(results)} tests{extra})")
