import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rectsurf.lattice import build_code  # noqa: E402

_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def code33():
    return build_code(3, 3)


@pytest.fixture(scope="session")
def code35():
    return build_code(3, 5)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
