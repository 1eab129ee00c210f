import re
from functools import lru_cache

import pytest
from hypothesis import settings

from stripdef import cli
from stripdef import crooked as ck

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@lru_cache(maxsize=None)
def context(n: int):
    return cli.build_context(n)


@lru_cache(maxsize=None)
def domain(n: int):
    ctx = context(n)
    return ck.build_domain(ctx.deformation, ctx.av, ctx.bmap, ctx.A)


@pytest.fixture(scope="session")
def ctx1():
    return context(1)


@pytest.fixture(scope="session")
def ctx2():
    return context(2)


@pytest.fixture(params=[1, 2], ids=["n1", "n2"], scope="session")
def ctx(request):
    return context(request.param)


# one summary line per acceptance criterion

_criteria: dict = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2).split("[")[0])
    if report.when == "call" or report.outcome != "passed":
        prev = _criteria.get(key, "PASS")
        _criteria[key] = "PASS" if prev == "PASS" and report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (k, name), status in sorted(_criteria.items()):
        terminalreporter.write_line(f"criterion {k:2d} {name}: {status}")
