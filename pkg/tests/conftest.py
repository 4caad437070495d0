import numpy as np
import pytest

from tfspell.landmarks import Frame, Handedness, HandLandmarks
from tfspell.synth import OPEN_PALM

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def hand_from(overrides=None, base=None, handedness="Right"):
    """Hand built from ``base`` (default: the open-palm template) with per-index xy(z) overrides."""
    pts = np.array(OPEN_PALM if base is None else base, dtype=float).copy()
    for idx, xy in (overrides or {}).items():
        pts[idx, : len(xy)] = xy
    return HandLandmarks(pts, Handedness(handedness), 1.0)


def hand_with_vectors(index, middle, ring, pinky):
    """Hand whose four finger vectors are exactly the given 2-D displacements."""
    pts = np.zeros((21, 3))
    bases = {5: index, 9: middle, 13: ring, 17: pinky}
    for k, (mcp, vec) in enumerate(bases.items()):
        pts[mcp, :2] = (k, 0.0)
        pts[mcp + 3, :2] = (k + vec[0], vec[1])
    return HandLandmarks(pts)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def one_hand_frame():
    return Frame("one", (hand_from(),))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0][2:])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {detail}")
