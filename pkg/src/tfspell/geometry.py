"""Planar hand geometry: finger vectors, pose predicates, nearest landmark.

Every function here works on the xy projection of the landmarks; z never
enters a result. Inequalities are strict, so exact ties fail a predicate.
"""

from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from .landmarks import (
    INDEX_MCP,
    INDEX_TIP,
    MIDDLE_MCP,
    MIDDLE_TIP,
    PINKY_MCP,
    PINKY_TIP,
    RING_MCP,
    RING_TIP,
    THUMB_MCP,
    THUMB_TIP,
    WRIST,
    HandLandmarks,
)


class Finger(enum.Enum):
    INDEX = (INDEX_MCP, INDEX_TIP)
    MIDDLE = (MIDDLE_MCP, MIDDLE_TIP)
    RING = (RING_MCP, RING_TIP)
    PINKY = (PINKY_MCP, PINKY_TIP)

    @property
    def mcp(self) -> int:
        return self.value[0]

    @property
    def tip(self) -> int:
        return self.value[1]


class FingerVector(NamedTuple):
    dx: float
    dy: float

    def dot(self, other: "FingerVector") -> float:
        return self.dx * other.dx + self.dy * other.dy


class NearestResult(NamedTuple):
    landmark_index: int
    distance: float


def finger_vector(hand: HandLandmarks, finger: Finger) -> FingerVector:
    """MCP-to-tip displacement of ``finger`` in the image plane."""
    tip, mcp = hand.points[finger.tip], hand.points[finger.mcp]
    return FingerVector(float(tip[0] - mcp[0]), float(tip[1] - mcp[1]))


def is_open_palm(hand: HandLandmarks) -> bool:
    """Upright outstretched palm test (y-up coordinates).

    All four fingertips must sit above their knuckles, and the thumb MCP must
    lie strictly between the thumb tip and the wrist along x.
    """
    p = hand.points
    for finger in Finger:
        if not p[finger.tip, 1] > p[finger.mcp, 1]:
            return False
    thumb_side = (p[THUMB_TIP, 0] - p[THUMB_MCP, 0]) * (p[WRIST, 0] - p[THUMB_MCP, 0])
    return bool(thumb_side < 0)


def is_pointing(hand: HandLandmarks) -> bool:
    """Index finger extended against the three curled fingers.

    The index vector must point away from each of the middle, ring and pinky
    vectors (negative dot product for all three).
    """
    v_index = finger_vector(hand, Finger.INDEX)
    return all(
        v_index.dot(finger_vector(hand, f)) < 0
        for f in (Finger.MIDDLE, Finger.RING, Finger.PINKY)
    )


def nearest_landmark(p, hand: HandLandmarks) -> NearestResult:
    """Closest landmark of ``hand`` to the 2-D point ``p``.

    Ties go to the lowest index (``np.argmin`` returns the first minimum).
    """
    q = np.asarray(p, dtype=np.float64)[:2]
    dx = hand.xy[:, 0] - q[0]
    dy = hand.xy[:, 1] - q[1]
    d = np.sqrt(dx * dx + dy * dy)
    i = int(np.argmin(d))
    return NearestResult(i, float(d[i]))


def finger_lengths(hand: HandLandmarks) -> np.ndarray:
    """Straight-line MCP-to-tip lengths of index, middle, ring, pinky."""
    return np.array([np.hypot(*finger_vector(hand, f)) for f in Finger])


def relative_threshold(hand: HandLandmarks) -> float:
    return float(np.mean(finger_lengths(hand)) / 3.0)
