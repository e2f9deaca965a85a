import shutil
from pathlib import Path

import pytest

from heterodeploy.patterns import load_pattern_db, seed_database_path

FIXTURES = Path(__file__).parent / "fixtures"

#: One verdict line per acceptance check, echoed after the run so the
#: pass/fail summary is visible without -s.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance checks")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def seed_db_path() -> Path:
    return seed_database_path()


@pytest.fixture(scope="session")
def seed_db(seed_db_path):
    return load_pattern_db(seed_db_path)


@pytest.fixture()
def workspace(tmp_path) -> Path:
    return tmp_path / "workspace"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def read_fixture(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def copy_fixture(name: str, dest_dir: Path) -> Path:
    dest = dest_dir / name
    shutil.copy(fixture_path(name), dest)
    return dest
