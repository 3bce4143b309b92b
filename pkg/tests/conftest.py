import pytest

_VERDICTS = {}


@pytest.fixture
def verdict():
    """Record a one-line pass/fail outcome for the summary, then assert it."""

    def record(key, passed, detail):
        _VERDICTS[key] = (bool(passed), detail)
        print(f"{key}: {'PASS' if passed else 'FAIL'} ({detail})")
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_VERDICTS, key=lambda k: int(k.split()[1])):
        passed, detail = _VERDICTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if passed else 'FAIL'}  {detail}")
