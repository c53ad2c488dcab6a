import pytest

_RESULTS = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion and print it."""

    def record(name, passed, detail=""):
        line = f"{name}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        _RESULTS.append(line)
        rep = request.config.pluginmanager.get_plugin("terminalreporter")
        if rep is not None:
            rep.write_line("")
            rep.write_line(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_RESULTS, key=lambda s: int(s.split(":")[0][1:])):
            terminalreporter.write_line(line)
