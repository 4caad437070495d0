"""Hand landmark data model and the JSONL frame stream format.

Landmark indices follow the usual 21-point hand topology::

    0        wrist
    1-4      thumb CMC, MCP, IP, tip
    5-8      index MCP, PIP, DIP, tip
    9-12     middle
    13-16    ring
    17-20    pinky

Internally y points up, so "above" means larger y. Streams recorded in image
coordinates (y down) are converted with :func:`canonicalize`.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

N_LANDMARKS = 21

WRIST = 0
THUMB_MCP = 2
THUMB_TIP = 4
INDEX_MCP, INDEX_TIP = 5, 8
MIDDLE_MCP, MIDDLE_TIP = 9, 12
RING_MCP, RING_TIP = 13, 16
PINKY_MCP, PINKY_TIP = 17, 20


class MalformedRecord(ValueError):
    """A line of a landmark stream could not be turned into a valid frame."""

    def __init__(self, line: int, cause: str):
        super().__init__(f"line {line}: {cause}")
        self.line = line
        self.cause = cause


class Handedness(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


class AxisConvention(str, enum.Enum):
    UP = "up"
    DOWN = "down"


class Landmark(NamedTuple):
    x: float
    y: float
    z: float


def _frozen_points(points) -> np.ndarray:
    arr = np.array(points, dtype=np.float64)
    if arr.shape != (N_LANDMARKS, 3):
        raise ValueError(f"expected {N_LANDMARKS} landmarks of 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("landmark coordinates must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HandLandmarks:
    """One detected hand: 21 ordered 3-D landmarks plus detector metadata.

    ``points`` is a read-only ``(21, 3)`` float64 array.
    """

    points: np.ndarray
    handedness: Handedness = Handedness.RIGHT
    score: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_points(self.points))
        object.__setattr__(self, "handedness", Handedness(self.handedness))
        score = float(self.score)
        if not (0.0 <= score <= 1.0):
            raise ValueError(f"score must lie in [0, 1], got {score}")
        object.__setattr__(self, "score", score)

    @property
    def landmarks(self) -> tuple[Landmark, ...]:
        return tuple(Landmark(*map(float, p)) for p in self.points)

    @property
    def xy(self) -> np.ndarray:
        return self.points[:, :2]

    def with_points(self, points) -> "HandLandmarks":
        return HandLandmarks(points, self.handedness, self.score)

    def __eq__(self, other):
        if not isinstance(other, HandLandmarks):
            return NotImplemented
        return (
            self.handedness == other.handedness
            and self.score == other.score
            and np.array_equal(self.points, other.points)
        )

    def __hash__(self):
        return hash((self.points.tobytes(), self.handedness, self.score))


@dataclass(frozen=True)
class Frame:
    frame_id: str
    hands: tuple[HandLandmarks, ...] = field(default_factory=tuple)

    def __post_init__(self):
        hands = tuple(self.hands)
        if len(hands) > 2:
            raise ValueError(f"a frame holds at most 2 hands, got {len(hands)}")
        object.__setattr__(self, "hands", hands)


def hand_count(frame: Frame) -> int:
    return len(frame.hands)


def canonicalize(frame: Frame, conv: AxisConvention | str) -> Frame:
    """Return ``frame`` expressed in the y-up convention."""
    if AxisConvention(conv) is AxisConvention.UP:
        return frame
    flip = np.array([1.0, -1.0, 1.0])
    return Frame(frame.frame_id, tuple(h.with_points(h.points * flip) for h in frame.hands))


def frame_to_record(frame: Frame) -> dict:
    return {
        "frame_id": frame.frame_id,
        "hands": [
            {
                "handedness": h.handedness.value,
                "score": h.score,
                "landmarks": h.points.tolist(),
            }
            for h in frame.hands
        ],
    }


def serialize_frames(frames: Iterable[Frame]) -> str:
    return "".join(json.dumps(frame_to_record(f)) + "\n" for f in frames)


def _parse_hand(obj, lineno: int) -> HandLandmarks:
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, "hand entry is not an object")
    try:
        handedness = Handedness(obj["handedness"])
    except KeyError:
        raise MalformedRecord(lineno, "hand is missing 'handedness'") from None
    except ValueError:
        raise MalformedRecord(lineno, f"unknown handedness label {obj['handedness']!r}") from None

    score = obj.get("score", 1.0)
    if isinstance(score, bool) or not isinstance(score, (int, float)):
        raise MalformedRecord(lineno, "score is not a number")
    if not math.isfinite(score) or not 0.0 <= score <= 1.0:
        raise MalformedRecord(lineno, f"score {score!r} outside [0, 1]")

    lms = obj.get("landmarks")
    if not isinstance(lms, list):
        raise MalformedRecord(lineno, "hand is missing a 'landmarks' list")
    if len(lms) != N_LANDMARKS:
        raise MalformedRecord(lineno, f"expected {N_LANDMARKS} landmarks, got {len(lms)}")
    for j, lm in enumerate(lms):
        if not isinstance(lm, list) or len(lm) != 3:
            raise MalformedRecord(lineno, f"landmark {j} is not an [x, y, z] triple")
        for v in lm:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise MalformedRecord(lineno, f"landmark {j} has a non-numeric component")
            if not math.isfinite(v):
                raise MalformedRecord(lineno, f"landmark {j} has a non-finite component")
    return HandLandmarks(lms, handedness, score)


def parse_record(line: str, lineno: int = 1) -> Frame:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, "record is not a JSON object")
    frame_id = obj.get("frame_id")
    if not isinstance(frame_id, str):
        raise MalformedRecord(lineno, "'frame_id' must be a string")
    hands = obj.get("hands")
    if not isinstance(hands, list):
        raise MalformedRecord(lineno, "'hands' must be a list")
    if len(hands) > 2:
        raise MalformedRecord(lineno, f"at most 2 hands per frame, got {len(hands)}")
    return Frame(frame_id, tuple(_parse_hand(h, lineno) for h in hands))


def parse_frames(stream: str | Iterable[str]) -> list[Frame]:
    """Parse JSONL landmark records, one frame per nonempty line.

    Non-finite numbers (``NaN``/``Infinity``, which Python's json accepts)
    are rejected along with every other shape error.
    """
    lines = stream.splitlines() if isinstance(stream, str) else stream
    frames = []
    for lineno, line in enumerate(lines, start=1):
        if line.strip():
            frames.append(parse_record(line, lineno))
    return frames


def read_frames(path) -> list[Frame]:
    with open(path, encoding="utf-8") as fh:
        return parse_frames(fh)


def write_frames(path, frames: Sequence[Frame]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_frames(frames))


def read_labels(path) -> dict[str, str]:
    """Read a ``frame_id,label`` CSV (header row optional)."""
    labels: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and row == ["frame_id", "label"]):
                continue
            if len(row) != 2 or not row[1]:
                raise MalformedRecord(lineno, "expected 'frame_id,label'")
            labels[row[0]] = row[1]
    return labels


def write_labels(path, pairs: Iterable[tuple[str, str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["frame_id", "label"])
        w.writerows(pairs)
