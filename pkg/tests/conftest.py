from __future__ import annotations

import pytest

from oracles import random_tuples, rng_for


@pytest.fixture
def rng(request):
    """Per-test RNG; QUBE_SEED changes every stream at once."""
    return rng_for(request.node.nodeid)


@pytest.fixture
def random_instances():
    def make(n: int, tag: str = "inst", **kw):
        return [random_tuples(rng_for(tag, i), **kw) for i in range(n)]

    return make


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
