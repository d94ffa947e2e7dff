import hypothesis
import numpy as np
import pytest

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion and assert it."""

    def record(number, description, passed, detail=""):
        line = f"[criterion {number:2d}] {'PASS' if passed else 'FAIL'}  {description}"
        if detail:
            line += f"  ({detail})"
        _ACCEPTANCE.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
