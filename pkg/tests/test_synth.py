from collections import Counter

import numpy as np
import pytest

from tfspell.geometry import is_open_palm, is_pointing
from tfspell.landmarks import Frame
from tfspell.rules import KeypointMap, RbKind, classify_point_on_hand
from tfspell.synth import (
    OPEN_PALM,
    SEPARATION_FACTOR,
    InvalidParams,
    OcclusionMode,
    OcclusionSpec,
    PoseParams,
    class_templates,
    generate_class_dataset,
    generate_open_palm,
    generate_pointing_frame,
    min_separation,
    occlude,
)


def test_open_palm_identity_is_template():
    h = generate_open_palm(PoseParams())
    assert np.array_equal(h.points, OPEN_PALM)
    assert is_open_palm(h)


def test_open_palm_deterministic():
    p = PoseParams(noise_sigma=0.01, seed=5)
    assert generate_open_palm(p) == generate_open_palm(p)
    assert generate_open_palm(p) != generate_open_palm(PoseParams(noise_sigma=0.01, seed=6))


def test_open_palm_rotated_180():
    assert not is_open_palm(generate_open_palm(PoseParams(rotation_deg=180)))


def test_open_palm_survives_small_noise():
    assert all(is_open_palm(generate_open_palm(PoseParams(noise_sigma=0.005, seed=s))) for s in range(200))


def test_pointing_frame_roles():
    f = generate_pointing_frame(7)
    pointer, palm = f.hands
    assert is_pointing(pointer) and not is_open_palm(pointer)
    assert is_open_palm(palm) and not is_pointing(palm)


def test_pointing_frame_target_zero():
    out = classify_point_on_hand(generate_pointing_frame(0), KeypointMap({}))
    assert out.nearest.landmark_index == 0


def test_pointing_frame_target_nine_gives_mapped_sign():
    kmap = KeypointMap.default()
    assert classify_point_on_hand(generate_pointing_frame(9), kmap).sign == kmap[9]


def test_pointing_frame_deterministic():
    p = PoseParams(noise_sigma=0.01, seed=11)
    assert generate_pointing_frame(3, p) == generate_pointing_frame(3, p)


def test_pointing_frame_under_transform():
    kmap = KeypointMap.default()
    for target in kmap:
        p = PoseParams(scale=1.7, rotation_deg=10, translation=(0.4, -0.2))
        assert classify_point_on_hand(generate_pointing_frame(target, p), kmap).sign == kmap[target]


def test_bad_target():
    with pytest.raises(InvalidParams):
        generate_pointing_frame(21)


def test_dataset_counts_and_balance():
    data = generate_class_dataset(30, 100, PoseParams(noise_sigma=0.005, seed=1))
    assert len(data) == 3000
    assert set(Counter(lab for _, lab in data).values()) == {100}


def test_two_classes_zero_noise_constant():
    data = generate_class_dataset(2, 5, PoseParams())
    by = {}
    for h, lab in data:
        by.setdefault(lab, []).append(h)
    assert len(by) == 2
    a, b = by.values()
    assert all(h == a[0] for h in a) and all(h == b[0] for h in b)
    assert a[0] != b[0]


def test_nearest_template_oracle_zero_noise():
    templates = class_templates(30)
    data = generate_class_dataset(30, 3, PoseParams())
    for h, lab in data:
        dists = [np.linalg.norm(h.points - t) for t in templates]
        assert f"S{int(np.argmin(dists)) + 1:02d}" == lab
        assert min(dists) == 0.0


def test_separation_guard():
    sep = min_separation(class_templates(30))
    generate_class_dataset(30, 1, PoseParams(noise_sigma=sep / SEPARATION_FACTOR * 0.999))
    with pytest.raises(InvalidParams):
        generate_class_dataset(30, 1, PoseParams(noise_sigma=sep / SEPARATION_FACTOR * 1.01))


@pytest.mark.parametrize("n", [1, 31])
def test_class_count_range(n):
    with pytest.raises(InvalidParams):
        generate_class_dataset(n, 1, PoseParams())


def test_occlusion_levels_enforced():
    with pytest.raises(InvalidParams):
        OcclusionSpec(0.3)


@pytest.mark.parametrize("mode", list(OcclusionMode))
def test_occlusion_zero_is_identity(mode):
    f = generate_pointing_frame(5)
    assert occlude(f, OcclusionSpec(0.0, mode), seed=1) is f


def test_drop_hand():
    f = occlude(generate_pointing_frame(5), OcclusionSpec(0.5, OcclusionMode.DROP_HAND))
    assert len(f.hands) == 1
    assert classify_point_on_hand(f, KeypointMap.default()).kind is RbKind.NOT_TWO_HANDS


def test_perturb_region_touches_only_palm_near_tip():
    f = generate_pointing_frame(9)
    out = occlude(f, OcclusionSpec(0.2, OcclusionMode.PERTURB_REGION), seed=3)
    assert out.hands[0] == f.hands[0]
    changed = np.flatnonzero(np.any(out.hands[1].points != f.hands[1].points, axis=1))
    assert len(changed) == 5  # ceil(0.2 * 21)
    assert 9 in changed


def test_heavy_occlusion_degrades():
    kmap = KeypointMap.default()
    targets = sorted(kmap)
    changed = 0
    for s in range(100):
        f = generate_pointing_frame(targets[s % len(targets)], PoseParams(seed=s))
        clean = classify_point_on_hand(f, kmap)
        hit = classify_point_on_hand(occlude(f, OcclusionSpec(0.8), seed=s), kmap)
        changed += (clean.kind, clean.sign) != (hit.kind, hit.sign)
    assert changed >= 10


def test_occlude_one_hand_frame_perturb_noop(one_hand_frame):
    assert occlude(one_hand_frame, OcclusionSpec(0.5)) is one_hand_frame
    assert occlude(Frame("e", ()), OcclusionSpec(0.5, "drop_hand")).hands == ()
