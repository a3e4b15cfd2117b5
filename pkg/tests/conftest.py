import numpy as np
import pytest

from disperse_uc.grid import from_function, make_grid


@pytest.fixture
def gauss20():
    g = make_grid(20.0, 1024)
    return from_function(g, lambda x: np.exp(-x ** 2 / 2))


ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = {}


@pytest.fixture
def record(request):
    """record(criterion, ok, detail) collects one part of an acceptance criterion."""
    table = request.config.stash[ACCEPTANCE_KEY]

    def add(criterion: int, ok: bool, detail: str):
        table.setdefault(criterion, []).append((bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}")
        return ok

    return add


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(ACCEPTANCE_KEY, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(table):
        parts = table[c]
        ok = all(p[0] for p in parts)
        detail = "; ".join(("" if p[0] else "FAILED ") + p[1] for p in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {c:2d}: {detail}")
