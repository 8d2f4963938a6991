from __future__ import annotations

from pathlib import Path

import pytest

from railevac import SAMPLE_DIR
from railevac.network import RailNetwork, load_network

from _acceptance import RESULTS


@pytest.fixture(scope="session")
def sample_paths() -> dict[str, Path]:
    base = Path(str(SAMPLE_DIR))
    return {name: base / f"{name}.csv" for name in ("stations", "lines", "passengers")} | {
        "scenario": base / "scenario.json"}


@pytest.fixture(scope="session")
def sample_network(sample_paths) -> RailNetwork:
    return load_network(sample_paths["stations"], sample_paths["lines"],
                        sample_paths["passengers"])


@pytest.fixture
def write_csvs(tmp_path):
    """Write stations/lines/passengers CSV text into tmp_path; return the paths."""
    def _write(stations: str, lines: str, passengers: str):
        paths = []
        for name, text in (("stations", stations), ("lines", lines),
                           ("passengers", passengers)):
            p = tmp_path / f"{name}.csv"
            p.write_text(text, encoding="utf-8")
            paths.append(p)
        return paths
    return _write


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(RESULTS, key=lambda s: int(s[1:].split()[0])):
        status, detail = RESULTS[name]
        terminalreporter.write_line(f"{status:<4} {name}: {detail}")
