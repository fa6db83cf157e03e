import contextlib

import pytest

# filled in by the acceptance test; printed after the test summary so the
# verdict line survives pytest's output capture
_ACCEPTANCE_RESULTS = []


@pytest.fixture
def criterion():
    @contextlib.contextmanager
    def _criterion(name):
        try:
            yield
        except BaseException:
            _ACCEPTANCE_RESULTS.append((name, False))
            raise
        _ACCEPTANCE_RESULTS.append((name, True))

    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    for name, passed in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(
            f"[ACCEPTANCE] {name}: {'PASS' if passed else 'FAIL'}"
        )
