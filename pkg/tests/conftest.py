import pytest

_OUTCOMES = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance outcome: ``criterion(k, title, ok, detail)``; asserts ``ok``."""
    outcomes = request.config.stash.setdefault(_OUTCOMES, {})

    def record(k, title, ok, detail=""):
        outcomes[k] = (title, bool(ok), detail)
        assert ok, f"criterion {k} ({title}) failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, config):
    outcomes = config.stash.get(_OUTCOMES, {})
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(outcomes):
        title, ok, detail = outcomes[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {k:>2}. {title}: {detail}")
