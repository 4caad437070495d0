"""Thai finger spelling recognition from 21-point hand landmarks."""

from .dispatch import Route, SignPrediction, recognize
from .geometry import finger_vector, is_open_palm, is_pointing, nearest_landmark, relative_threshold
from .landmarks import AxisConvention, Frame, HandLandmarks, canonicalize, hand_count, parse_frames
from .mlp import Encoding, MlpModel, TrainConfig, encode, forward, load_model, save_model, train
from .rules import KeypointMap, RbKind, RbOutcome, assign_roles, classify_point_on_hand

__all__ = [
    "AxisConvention",
    "Encoding",
    "Frame",
    "HandLandmarks",
    "KeypointMap",
    "MlpModel",
    "RbKind",
    "RbOutcome",
    "Route",
    "SignPrediction",
    "TrainConfig",
    "assign_roles",
    "canonicalize",
    "classify_point_on_hand",
    "encode",
    "finger_vector",
    "forward",
    "hand_count",
    "is_open_palm",
    "is_pointing",
    "load_model",
    "nearest_landmark",
    "parse_frames",
    "recognize",
    "relative_threshold",
    "save_model",
    "train",
]
