import sys

import pytest

from padic_circles.cli import build_group, load_config
from padic_circles.padic import ExtContext
from padic_circles.schottky import core_graph


@pytest.fixture(scope="session")
def ctx():
    return ExtContext(3, 2, 48)


@pytest.fixture(scope="session")
def example():
    cfg = load_config(fixture="example-2.5")
    group = build_group(cfg)
    return group, core_graph(group, 3)


@pytest.fixture(scope="session")
def nonexample():
    cfg = load_config(fixture="nonexample-2.5")
    group = build_group(cfg)
    return group, core_graph(group, 3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
