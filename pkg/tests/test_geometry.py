import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tfspell.geometry import (
    Finger,
    FingerVector,
    finger_vector,
    is_open_palm,
    is_pointing,
    nearest_landmark,
    relative_threshold,
)
from tfspell.landmarks import HandLandmarks
from tfspell.synth import OPEN_PALM, POINTING

from conftest import hand_from, hand_with_vectors


def brute_nearest(p, hand):
    def dist(i):
        x, y = float(hand.points[i, 0]), float(hand.points[i, 1])
        return math.sqrt((x - p[0]) ** 2 + (y - p[1]) ** 2)

    best_i, best_d = 0, dist(0)
    for i in range(1, 21):
        d = dist(i)
        if d < best_d:
            best_i, best_d = i, d
    return best_i, best_d


def open_palm_case():
    """Every tip 0.2 above its knuckle; thumb tip, MCP, wrist at x = 0.1, 0.3, 0.5."""
    pts = np.zeros((21, 3))
    for k, (mcp, tip) in enumerate([(5, 8), (9, 12), (13, 16), (17, 20)]):
        pts[mcp] = (0.2 + 0.1 * k, 0.5, 0)
        pts[tip] = (0.2 + 0.1 * k, 0.7, 0)
    pts[4, 0], pts[2, 0], pts[0, 0] = 0.1, 0.3, 0.5
    return pts


def test_finger_vector_index():
    h = hand_from({8: (0.5, 0.9), 5: (0.5, 0.5)})
    v = finger_vector(h, Finger.INDEX)
    assert v == pytest.approx(FingerVector(0.0, 0.4))


def test_finger_vector_zero():
    h = hand_from({12: (0.3, 0.3), 9: (0.3, 0.3)})
    assert finger_vector(h, Finger.MIDDLE) == (0.0, 0.0)


def test_finger_vector_pinky():
    h = hand_from({20: (0.2, 0.1), 17: (0.3, 0.4)})
    assert finger_vector(h, Finger.PINKY) == pytest.approx((-0.1, -0.3))


def test_open_palm_constructed():
    assert is_open_palm(HandLandmarks(open_palm_case()))


def test_fist_fails_open_palm():
    pts = open_palm_case()
    for mcp, tip in [(5, 8), (9, 12), (13, 16), (17, 20)]:
        pts[tip, 1] = pts[mcp, 1] - 0.1
    assert not is_open_palm(HandLandmarks(pts))


def test_thumb_same_side_fails():
    pts = open_palm_case()
    pts[4, 0], pts[2, 0], pts[0, 0] = 0.5, 0.3, 0.5
    assert not is_open_palm(HandLandmarks(pts))


def test_open_palm_tie_fails():
    pts = open_palm_case()
    pts[16, 1] = pts[13, 1]
    assert not is_open_palm(HandLandmarks(pts))


def test_pointing_cases():
    assert is_pointing(hand_with_vectors((0, 1), (0, -1), (0, -1), (0, -1)))
    assert not is_pointing(hand_with_vectors((0, 1), (0, 1), (0, 1), (0, 1)))
    assert not is_pointing(hand_with_vectors((0, 1), (1, 0), (0, -1), (0, -1)))


def test_nearest_exact_hit():
    h = hand_from()
    assert nearest_landmark(h.points[9, :2], h) == (9, 0.0)


def test_nearest_tie_goes_to_lowest_index():
    pts = np.arange(63, dtype=float).reshape(21, 3) + 10.0
    pts[5, :2] = (1.0, 0.0)
    pts[9, :2] = (-1.0, 0.0)
    h = HandLandmarks(pts)
    assert nearest_landmark((0.0, 0.0), h).landmark_index == 5


def test_nearest_matches_brute_force(rng):
    for _ in range(200):
        h = HandLandmarks(rng.uniform(-1, 1, size=(21, 3)))
        p = rng.uniform(-1.5, 1.5, size=2)
        got = nearest_landmark(p, h)
        i, d = brute_nearest(p, h)
        assert got.landmark_index == i
        assert got.distance == d


@pytest.mark.parametrize(
    "lengths, expected",
    [((0.3, 0.3, 0.3, 0.3), 0.1), ((0.2, 0.3, 0.4, 0.5), 0.35 / 3), ((0, 0, 0, 0), 0.0)],
)
def test_relative_threshold(lengths, expected):
    h = hand_with_vectors(*[(0.0, L) for L in lengths])
    assert relative_threshold(h) == pytest.approx(expected, rel=1e-12, abs=0)


scales = st.floats(min_value=0.01, max_value=100)
offsets = st.floats(min_value=-50, max_value=50)


@given(scales, offsets, offsets, offsets, offsets)
def test_predicates_invariant_to_scale_and_translation(s, cx, cy, tx, ty):
    center = np.array([cx, cy, 0.0])
    shift = np.array([tx, ty, 0.0])
    for base in (OPEN_PALM, POINTING):
        h = HandLandmarks(base)
        moved = HandLandmarks((base - center) * s + center + shift)
        assert is_open_palm(moved) == is_open_palm(h)
        assert is_pointing(moved) == is_pointing(h)


@given(st.floats(min_value=0, max_value=360))
def test_pointing_rotation_invariant(deg):
    th = math.radians(deg)
    rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    pts = POINTING.copy()
    pts[:, :2] = pts[:, :2] @ rot.T
    assert is_pointing(HandLandmarks(pts))


def test_open_palm_rotated_180_fails():
    pts = OPEN_PALM.copy()
    pts[:, :2] *= -1
    assert is_open_palm(HandLandmarks(OPEN_PALM))
    assert not is_open_palm(HandLandmarks(pts))


@given(st.floats(min_value=0.01, max_value=100))
def test_threshold_scales_linearly(s):
    h = HandLandmarks(OPEN_PALM)
    assert relative_threshold(HandLandmarks(OPEN_PALM * s)) == pytest.approx(s * relative_threshold(h), rel=1e-12)


def test_z_never_matters(rng):
    for base in (OPEN_PALM, POINTING):
        h = HandLandmarks(base)
        pts = base.copy()
        pts[:, 2] = rng.normal(size=21) * 5
        h2 = HandLandmarks(pts)
        p = rng.uniform(-0.5, 0.5, size=2)
        assert is_open_palm(h2) == is_open_palm(h)
        assert is_pointing(h2) == is_pointing(h)
        assert nearest_landmark(p, h2) == nearest_landmark(p, h)
        assert relative_threshold(h2) == relative_threshold(h)
        assert [finger_vector(h2, f) for f in Finger] == [finger_vector(h, f) for f in Finger]
