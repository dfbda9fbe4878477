import os

from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import pytest  # noqa: E402

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Run an acceptance check body returning (ok, detail); record one line per criterion."""
    def run(n, body):
        try:
            ok, detail = body()
        except Exception as exc:  # a crash is a failed criterion, reported like any other
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[n] = line
        print(line)
        assert ok, line
    return run


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
