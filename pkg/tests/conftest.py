import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from metapair import corpus_paths, load_dataset  # noqa: E402

_acceptance: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def corpus():
    return {p.stem: p for p in corpus_paths()}


@pytest.fixture(scope="session")
def records(corpus):
    return {name: load_dataset(path, name)[1] for name, path in corpus.items()}


def write_csv(path: Path, header, rows=()):
    lines = [",".join(header)] + [",".join(r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def make_csv(tmp_path):
    def _make(name, header, rows=()):
        return write_csv(tmp_path / name, header, rows)

    return _make


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], "PASS" if report.passed else "FAIL"))
    elif report.when == "setup" and report.failed and "test_acceptance.py" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _acceptance:
        terminalreporter.write_line(f"{status}  {name}")
