import numpy as np
import pytest

SYM3 = np.array([[5.0, 4, 2], [4, 5, -2], [2, -2, 8]])
AH3 = np.array([[1.0, 3, 8], [2, 2, 8], [3, 1, 8]])


def low_rank(rng, m, n, r):
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))


def sym_low_rank(rng, n, r):
    B = rng.standard_normal((n, r))
    d = rng.choice([-1.0, 1.0], size=r) * rng.uniform(0.5, 2.0, size=r)
    A = (B * d) @ B.T
    return 0.5 * (A + A.T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sym3():
    return SYM3.copy()


@pytest.fixture
def ah3():
    return AH3.copy()


# ---------------------------------------------------------------- acceptance report

_CRITERIA: dict = {}
_TITLES: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            num, title = mark.args
            _TITLES[num] = title
            _CRITERIA.setdefault(num, {})[item.nodeid] = None


def pytest_runtest_logreport(report):
    for tests in _CRITERIA.values():
        if report.nodeid in tests:
            if report.when == "call" or report.outcome != "passed":
                prev = tests[report.nodeid]
                tests[report.nodeid] = report.outcome if prev in (None, "passed") else prev


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        outcomes = _CRITERIA[num].values()
        if any(o is None for o in outcomes):
            status = "NOT RUN"
        else:
            status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        failed = [nid.split("::")[-1] for nid, o in _CRITERIA[num].items() if o not in ("passed", None)]
        detail = f"  (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {num:2d} {status:4s} {_TITLES[num]}{detail}")
