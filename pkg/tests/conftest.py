import pytest

ACCEPTANCE_LINES = pytest.StashKey[dict]()


@pytest.fixture
def record_criterion(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_LINES, {})

    def record(result):
        lines[result.number] = result.line()
        print(result.line())
        for c in result.checks:
            print(f"    {c.name}: {c.measured:.6g} (tolerance {c.tolerance:.3g}){' info' if not c.asserted else ''}")

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
