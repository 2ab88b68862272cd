import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from eprworlds.spin import Direction

sys.path.insert(0, str(Path(__file__).parent))

REPO = Path(__file__).resolve().parents[1]


def random_direction(rng: np.random.Generator) -> Direction:
    return Direction.from_vector(rng.standard_normal(3))


def random_ket(rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return v / np.linalg.norm(v)


directions = st.builds(
    Direction,
    st.floats(0.0, math.pi, allow_nan=False),
    st.floats(0.0, 2 * math.pi, allow_nan=False, exclude_max=True),
)


@pytest.fixture
def rng():
    return np.random.default_rng(20000330)


@pytest.fixture(scope="session")
def schema():
    import json

    return json.loads((REPO / "schemas" / "report.schema.json").read_text())


def pytest_terminal_summary(terminalreporter):
    lines = getattr(sys.modules.get("test_acceptance"), "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
