"""Route each frame to the single-hand network or the point-on-hand rules."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .landmarks import Frame, hand_count
from .mlp import Mode, MlpModel, encode, logits, sigmoid
from .rules import KeypointMap, RbKind, RbOutcome, classify_point_on_hand


class Route(str, enum.Enum):
    SINGLE_HAND = "SingleHand"
    POINT_ON_HAND = "PointOnHand"
    NO_HANDS = "NoHands"


@dataclass(frozen=True)
class SignPrediction:
    frame_id: str
    route: Route
    label: str | None = None
    scores: dict[str, float] | None = None
    rb: RbOutcome | None = None

    def to_record(self) -> dict:
        return {
            "frame_id": self.frame_id,
            "route": self.route.value,
            "label": self.label,
            "scores": self.scores,
            "rb": None if self.rb is None else self.rb.to_dict(),
        }


def recognize(frame: Frame, model: MlpModel, kmap: KeypointMap) -> SignPrediction:
    h = hand_count(frame)
    if h == 1:
        z = logits(model, encode(frame.hands[0], model.encoding), Mode.INFER)
        scores = sigmoid(z)
        best = int(np.argmax(z))
        return SignPrediction(
            frame.frame_id,
            Route.SINGLE_HAND,
            model.class_labels[best],
            {lab: float(s) for lab, s in zip(model.class_labels, scores)},
        )
    if h == 2:
        outcome = classify_point_on_hand(frame, kmap)
        label = outcome.sign if outcome.kind is RbKind.SIGN else None
        return SignPrediction(frame.frame_id, Route.POINT_ON_HAND, label, rb=outcome)
    return SignPrediction(frame.frame_id, Route.NO_HANDS)
