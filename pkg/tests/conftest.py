import contextlib
import os
import sys
import time

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_LINES_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = []


@pytest.fixture
def criterion(request, capsys):
    """Context manager timing one acceptance criterion and recording PASS/FAIL."""
    lines = request.config.stash[_LINES_KEY]

    @contextlib.contextmanager
    def run(number, title, limit=None):
        start = time.perf_counter()
        status, detail = "FAIL", ""
        try:
            yield
            elapsed = time.perf_counter() - start
            if limit is not None and elapsed >= limit:
                detail = f"took {elapsed:.2f}s, limit {limit}s"
                raise AssertionError(detail)
            status, detail = "PASS", f"{elapsed:.2f}s" + (f" (limit {limit}s)" if limit else "")
        except BaseException as exc:
            detail = detail or f"{type(exc).__name__}: {exc}".splitlines()[0][:160]
            raise
        finally:
            line = f"criterion {number} {status}: {title} [{detail}]"
            lines.append(line)
            with capsys.disabled():
                print(f"\n{line}")

    return run


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
