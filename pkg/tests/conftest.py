import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def source(name: str) -> str:
    return (PROGRAMS / name).read_text()


FIB_SIGMA = {"X": 4, "Y": 3, "Z": 0, "N": 5}
FIB_SIGMA_FINAL = {"X": 11, "Y": 18, "Z": 7, "N": 2}
FIB_DELTA_FINAL = {"X": (7, 4, 3, 4), "Y": (3,), "Z": (4, 3, 3, 0), "N": (),
                   "B": (True,), "W": (True, True, True, False)}
RACE_SIGMA = {"X": 1, "Y": 1}


@pytest.fixture
def programs_dir():
    return PROGRAMS


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
