"""Rule-based recognizer for static point-on-hand signs.

A sign is read when one hand points (index out, other fingers curled back)
at the other, upright open palm. The pointing index tip is snapped to the
nearest landmark of the open palm and accepted only if it lies within a
third of that palm's mean finger length.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from importlib import resources
from typing import Mapping

from .geometry import NearestResult, is_open_palm, is_pointing, nearest_landmark, relative_threshold
from .landmarks import INDEX_TIP, N_LANDMARKS, Frame, HandLandmarks, hand_count


class InvalidKeypointMap(ValueError):
    pass


class KeypointMap(Mapping[int, str]):
    """Landmark index -> sign label for the designated open-palm areas."""

    def __init__(self, entries: Mapping[int, str]):
        clean: dict[int, str] = {}
        for k, v in entries.items():
            try:
                idx = int(k)
            except (TypeError, ValueError):
                raise InvalidKeypointMap(f"landmark index {k!r} is not an integer") from None
            if not 0 <= idx < N_LANDMARKS:
                raise InvalidKeypointMap(f"landmark index {idx} outside 0..{N_LANDMARKS - 1}")
            if idx in clean:
                raise InvalidKeypointMap(f"landmark index {idx} mapped twice")
            if not isinstance(v, str) or not v:
                raise InvalidKeypointMap(f"label for landmark {idx} must be a nonempty string")
            clean[idx] = v
        self._entries = clean

    def __getitem__(self, idx: int) -> str:
        return self._entries[idx]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"KeypointMap({self._entries!r})"

    @property
    def labels(self) -> list[str]:
        return list(self._entries.values())

    @classmethod
    def from_json(cls, text: str) -> "KeypointMap":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidKeypointMap(f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise InvalidKeypointMap("keypoint map must be a JSON object")
        return cls(obj)

    @classmethod
    def load(cls, path) -> "KeypointMap":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    @classmethod
    def default(cls) -> "KeypointMap":
        """Stand-in layout of the eleven areas A-K.

        A-C sit on the thumb (the edge nearest an approaching pointer), D-G on
        the finger knuckles across the palm, H-K on the fingertips.
        """
        text = resources.files("tfspell.data").joinpath("default_keypoint_map.json").read_text()
        return cls.from_json(text)

    def to_json(self) -> str:
        return json.dumps({str(k): v for k, v in self._entries.items()}, indent=2)


class RbKind(str, enum.Enum):
    SIGN = "Sign"
    NOT_TWO_HANDS = "NotTwoHands"
    NOT_POINT_ON_HAND = "NotPointOnHand"
    OUT_OF_THRESHOLD = "OutOfThreshold"
    UNMAPPED_LANDMARK = "UnmappedLandmark"


class HandSlot(str, enum.Enum):
    FIRST = "First"
    SECOND = "Second"


@dataclass(frozen=True)
class RbOutcome:
    kind: RbKind
    sign: str | None = None
    nearest: NearestResult | None = None
    threshold: float | None = None
    pointing_hand: HandSlot | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "sign": self.sign,
            "nearest": None if self.nearest is None else {
                "landmark_index": self.nearest.landmark_index,
                "distance": self.nearest.distance,
            },
            "threshold": self.threshold,
            "pointing_hand": None if self.pointing_hand is None else self.pointing_hand.value,
        }


def assign_roles(frame: Frame) -> tuple[HandLandmarks, HandLandmarks, HandSlot] | None:
    """Split a two-hand frame into ``(pointing, open_palm, pointing_slot)``.

    If both assignments are valid (each hand passes both predicates) the first
    hand in frame order is taken as the pointing one.
    """
    if hand_count(frame) != 2:
        return None
    a, b = frame.hands
    if is_pointing(a) and is_open_palm(b):
        return a, b, HandSlot.FIRST
    if is_pointing(b) and is_open_palm(a):
        return b, a, HandSlot.SECOND
    return None


def classify_point_on_hand(frame: Frame, kmap: KeypointMap) -> RbOutcome:
    if hand_count(frame) != 2:
        return RbOutcome(RbKind.NOT_TWO_HANDS)
    roles = assign_roles(frame)
    if roles is None:
        return RbOutcome(RbKind.NOT_POINT_ON_HAND)
    pointing, palm, slot = roles

    tip = pointing.xy[INDEX_TIP]
    nearest = nearest_landmark(tip, palm)
    thres = relative_threshold(palm)
    if nearest.distance > thres:
        return RbOutcome(RbKind.OUT_OF_THRESHOLD, None, nearest, thres, slot)
    if nearest.landmark_index not in kmap:
        return RbOutcome(RbKind.UNMAPPED_LANDMARK, None, nearest, thres, slot)
    return RbOutcome(RbKind.SIGN, kmap[nearest.landmark_index], nearest, thres, slot)
