"""Synthetic landmark frames with known ground truth.

The templates below are hand-written coordinate tables in the y-up frame,
wrist at the origin, roughly the proportions of an adult hand in
detector-normalized units. Noise is added in template space first; the
rigid scale / rotation / translation is applied afterwards, so transformed
outputs stay exact images of each other.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import relative_threshold
from .landmarks import INDEX_TIP, N_LANDMARKS, Frame, Handedness, HandLandmarks
from .rules import HandSlot, assign_roles

# Upright open palm, palm facing the camera, thumb towards -x.
# Margins on the open-palm test at zero noise:
#   tip.y - mcp.y: index 0.27, middle 0.31, ring 0.27, pinky 0.20
#   thumb: x4 - x2 = -0.11 and x0 - x2 = +0.15 (product -0.0165)
OPEN_PALM = np.array([
    [0.00, 0.00, 0.00],     # 0 wrist
    [-0.08, 0.06, -0.01],   # 1 thumb CMC
    [-0.15, 0.12, -0.02],   # 2 thumb MCP
    [-0.21, 0.18, -0.02],   # 3 thumb IP
    [-0.26, 0.24, -0.03],   # 4 thumb tip
    [-0.08, 0.30, 0.00],    # 5 index MCP
    [-0.10, 0.42, -0.01],
    [-0.11, 0.50, -0.02],
    [-0.12, 0.57, -0.03],   # 8 index tip
    [0.00, 0.32, 0.00],     # 9 middle MCP
    [0.00, 0.46, -0.01],
    [0.00, 0.55, -0.02],
    [0.00, 0.63, -0.03],    # 12 middle tip
    [0.07, 0.30, 0.00],     # 13 ring MCP
    [0.08, 0.42, -0.01],
    [0.09, 0.50, -0.02],
    [0.10, 0.57, -0.03],    # 16 ring tip
    [0.13, 0.26, 0.00],     # 17 pinky MCP
    [0.15, 0.35, -0.01],
    [0.16, 0.41, -0.02],
    [0.17, 0.46, -0.03],    # 20 pinky tip
])

# Pointing hand in local coordinates: index tip at the origin, index finger
# aimed along +x and slightly down, the other three fingers folded back.
# Margins on the pointing test (v_index = (0.28, -0.03)):
#   v_index . v_middle = -0.0209, . v_ring = -0.0181, . v_pinky = -0.0125
# It fails the open-palm test on every finger (index tip 0.03 below its MCP).
POINTING = np.array([
    [-0.55, -0.05, 0.00],   # 0 wrist
    [-0.48, 0.02, 0.00],    # 1 thumb CMC
    [-0.40, 0.07, 0.01],    # 2 thumb MCP
    [-0.33, 0.09, 0.02],    # 3 thumb IP
    [-0.27, 0.08, 0.03],    # 4 thumb tip
    [-0.28, 0.03, 0.00],    # 5 index MCP
    [-0.17, 0.02, 0.00],
    [-0.09, 0.01, 0.00],
    [0.00, 0.00, 0.00],     # 8 index tip
    [-0.29, -0.03, 0.00],   # 9 middle MCP
    [-0.21, -0.06, 0.03],
    [-0.25, -0.10, 0.05],
    [-0.37, -0.08, 0.04],   # 12 middle tip
    [-0.30, -0.08, 0.00],   # 13 ring MCP
    [-0.23, -0.11, 0.03],
    [-0.27, -0.15, 0.05],
    [-0.37, -0.13, 0.04],   # 16 ring tip
    [-0.31, -0.12, 0.00],   # 17 pinky MCP
    [-0.25, -0.15, 0.03],
    [-0.28, -0.18, 0.05],
    [-0.36, -0.17, 0.04],   # 20 pinky tip
])

# Fully curled joint positions for the single-hand class templates, as
# offsets from each digit's base joint (thumb CMC, finger MCPs).
_DIGITS = {
    "thumb": (1, [2, 3, 4]),
    "index": (5, [6, 7, 8]),
    "middle": (9, [10, 11, 12]),
    "ring": (13, [14, 15, 16]),
    "pinky": (17, [18, 19, 20]),
}
_CURLED_FINGER = np.array([[0.00, 0.05, -0.07], [0.00, -0.01, -0.10], [0.00, -0.06, -0.06]])
_CURLED_THUMB = np.array([[-0.02, 0.08, -0.02], [0.04, 0.12, -0.05], [0.10, 0.14, -0.07]])
CURL_LEVELS = (0.0, 0.5, 1.0)

MAX_CLASSES = 30
SEPARATION_FACTOR = 10.0
OCCLUSION_LEVELS = (0.0, 0.2, 0.5, 0.8)


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class PoseParams:
    noise_sigma: float = 0.0
    scale: float = 1.0
    rotation_deg: float = 0.0
    translation: tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        if not self.noise_sigma >= 0:
            raise InvalidParams("noise_sigma must be >= 0")
        if not self.scale > 0:
            raise InvalidParams("scale must be > 0")
        object.__setattr__(self, "translation", tuple(float(t) for t in self.translation))

    def rotation(self) -> np.ndarray:
        th = math.radians(self.rotation_deg)
        c, s = math.cos(th), math.sin(th)
        return np.array([[c, -s], [s, c]])


def _transform(points: np.ndarray, p: PoseParams, origin=(0.0, 0.0)) -> np.ndarray:
    """Scale (all axes) and rotate (xy) about the template origin, then translate."""
    out = points * p.scale
    if p.rotation_deg:
        out[:, :2] = out[:, :2] @ p.rotation().T
    out[:, 0] += origin[0]
    out[:, 1] += origin[1]
    return out


def _jitter(template: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    pts = template.copy()
    if sigma > 0:
        pts += rng.normal(0.0, sigma, size=pts.shape)
    return pts


def generate_open_palm(p: PoseParams = PoseParams(), rng: np.random.Generator | None = None) -> HandLandmarks:
    """Open-palm hand; passes the open-palm test while noise stays well under ~0.03."""
    rng = np.random.default_rng(p.seed) if rng is None else rng
    pts = _transform(_jitter(OPEN_PALM, p.noise_sigma, rng), p, p.translation)
    return HandLandmarks(pts, Handedness.LEFT, 1.0)


def generate_pointing_hand(
    tip_xy, p: PoseParams = PoseParams(), rng: np.random.Generator | None = None
) -> HandLandmarks:
    """Pointing hand whose noiseless index tip lands on ``tip_xy``."""
    rng = np.random.default_rng(p.seed) if rng is None else rng
    pts = _transform(_jitter(POINTING, p.noise_sigma, rng), p, tip_xy)
    return HandLandmarks(pts, Handedness.RIGHT, 1.0)


def generate_pointing_frame(target_index: int, p: PoseParams = PoseParams()) -> Frame:
    """Two-hand frame ``(pointing, open_palm)`` aimed at landmark ``target_index``."""
    if not 0 <= target_index < N_LANDMARKS:
        raise InvalidParams(f"target_index {target_index} outside 0..{N_LANDMARKS - 1}")
    rng = np.random.default_rng(p.seed)
    palm = generate_open_palm(p, rng)
    # aim at the noiseless target so jitter shows up as tip error
    target = _transform(OPEN_PALM[[target_index]].copy(), p, p.translation)[0, :2]
    pointer = generate_pointing_hand(target, p, rng)
    return Frame(f"poh-t{target_index:02d}-s{p.seed}", (pointer, palm))


def _curled(template: np.ndarray, curls: tuple[float, ...]) -> np.ndarray:
    pts = template.copy()
    for (name, (base, joints)), c in zip(_DIGITS.items(), curls):
        if c == 0.0:
            continue
        tucked = template[base] + (_CURLED_THUMB if name == "thumb" else _CURLED_FINGER)
        pts[joints] = (1.0 - c) * template[joints] + c * tucked
    return pts


def _template_pool() -> list[np.ndarray]:
    return [_curled(OPEN_PALM, curls) for curls in itertools.product(CURL_LEVELS, repeat=len(_DIGITS))]


def class_templates(n_classes: int) -> list[np.ndarray]:
    """``n_classes`` single-hand templates chosen by farthest-point selection.

    Starts from the open palm and repeatedly adds the curl configuration
    farthest (Frobenius distance over all 21 landmarks) from those already
    chosen; ties go to the earlier configuration, so the result is fixed.
    """
    if not 2 <= n_classes <= MAX_CLASSES:
        raise InvalidParams(f"n_classes must lie in 2..{MAX_CLASSES}, got {n_classes}")
    pool = np.stack(_template_pool())
    flat = pool.reshape(len(pool), -1)
    chosen = [0]
    dmin = np.linalg.norm(flat - flat[0], axis=1)
    while len(chosen) < n_classes:
        nxt = int(np.argmax(dmin))
        chosen.append(nxt)
        dmin = np.minimum(dmin, np.linalg.norm(flat - flat[nxt], axis=1))
    return [pool[i] for i in chosen]


def min_separation(templates) -> float:
    flat = np.stack([t.reshape(-1) for t in templates])
    return min(float(np.linalg.norm(a - b)) for a, b in itertools.combinations(flat, 2))


def class_label(k: int) -> str:
    return f"S{k + 1:02d}"


def generate_class_dataset(n_classes: int, per_class: int, p: PoseParams = PoseParams()) -> list[tuple[HandLandmarks, str]]:
    """Balanced labelled single-hand samples, ``per_class`` per template.

    Raises InvalidParams unless every pair of templates is at least
    ``SEPARATION_FACTOR * noise_sigma`` apart.
    """
    templates = class_templates(n_classes)
    sep = min_separation(templates)
    if sep < SEPARATION_FACTOR * p.noise_sigma:
        raise InvalidParams(
            f"templates are {sep:.4f} apart, below {SEPARATION_FACTOR:g} x noise_sigma = "
            f"{SEPARATION_FACTOR * p.noise_sigma:.4f}"
        )
    if per_class < 1:
        raise InvalidParams("per_class must be >= 1")
    rng = np.random.default_rng(p.seed)
    out = []
    for k, tpl in enumerate(templates):
        for _ in range(per_class):
            pts = _transform(_jitter(tpl, p.noise_sigma, rng), p, p.translation)
            out.append((HandLandmarks(pts, Handedness.RIGHT, 1.0), class_label(k)))
    return out


class OcclusionMode(str, enum.Enum):
    DROP_HAND = "drop_hand"
    PERTURB_REGION = "perturb_region"


@dataclass(frozen=True)
class OcclusionSpec:
    fraction: float
    mode: OcclusionMode = OcclusionMode.PERTURB_REGION

    def __post_init__(self):
        if self.fraction not in OCCLUSION_LEVELS:
            raise InvalidParams(f"occlusion fraction must be one of {OCCLUSION_LEVELS}")
        object.__setattr__(self, "mode", OcclusionMode(self.mode))


def occlude(frame: Frame, spec: OcclusionSpec, seed: int = 0) -> Frame:
    """Landmark-level stand-in for one hand covering the other.

    ``DROP_HAND`` deletes the second hand, as when the detector misses it.
    ``PERTURB_REGION`` jitters the ``ceil(fraction * 21)`` open-palm landmarks
    nearest the pointing index tip with Gaussian noise of standard deviation
    ``fraction`` times the palm's mean finger length.
    """
    if spec.fraction == 0.0 or not frame.hands:
        return frame
    if spec.mode is OcclusionMode.DROP_HAND:
        return Frame(frame.frame_id, frame.hands[:1])
    if len(frame.hands) != 2:
        return frame

    roles = assign_roles(frame)
    palm_slot = 0 if roles is not None and roles[2] is HandSlot.SECOND else 1
    pointer, palm = frame.hands[1 - palm_slot], frame.hands[palm_slot]

    rng = np.random.default_rng(seed)
    n_hidden = math.ceil(spec.fraction * N_LANDMARKS)
    d = np.linalg.norm(palm.xy - pointer.xy[INDEX_TIP], axis=1)
    hidden = np.argsort(d, kind="stable")[:n_hidden]
    sigma = spec.fraction * 3.0 * relative_threshold(palm)
    pts = palm.points.copy()
    pts[hidden] += rng.normal(0.0, sigma, size=(n_hidden, 3))

    hands = list(frame.hands)
    hands[palm_slot] = palm.with_points(pts)
    return Frame(frame.frame_id, tuple(hands))
