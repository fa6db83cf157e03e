import contextlib

import hypothesis
import pytest

hypothesis.settings.register_profile(
    "cohlab", derandomize=True, deadline=None, max_examples=40
)
hypothesis.settings.load_profile("cohlab")

# filled in by the acceptance tests; printed after the test summary so the
# verdict lines survive pytest's output capture
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
