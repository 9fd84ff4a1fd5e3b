
import pytest

from modcad.extension import default_engine
from modcad.model import Drawing


@pytest.fixture
def engine(tmp_path):
    return default_engine(catalog_dir=tmp_path / "catalog")


@pytest.fixture
def drawing():
    return Drawing(420, 297)


@pytest.fixture(autouse=True)
def _no_catalog_env(monkeypatch):
    monkeypatch.delenv("MODCAD_CATALOG", raising=False)


# Acceptance criteria report one line each; the lines are repeated in the
# terminal summary so they show up without -s.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
