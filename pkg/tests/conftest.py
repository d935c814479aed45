import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(20240)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log(request):
    """Record one line per acceptance criterion and echo it live."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def log(number, passed, text):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} {text}"
        ACCEPTANCE_LINES.append(line)
        with capman.global_and_fixture_disabled():
            print("\n    " + line, flush=True)
    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
