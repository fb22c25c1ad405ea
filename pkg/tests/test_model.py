from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from actrack.model import (
    ImageStack,
    LabelMaskStack,
    apply_min_area,
    extract_instances,
    filter_min_area,
)

from helpers import make_instance


def test_single_label_two_pixels():
    mask = np.zeros((4, 4), dtype=np.int32)
    mask[0, 0] = 1
    mask[0, 1] = 1
    (inst,) = extract_instances(mask, frame_index=1)
    assert inst.label == 1
    assert inst.area == 2
    assert inst.centroid == (0.5, 0.0)  # (x, y) with x = column
    assert inst.activity is None


def test_empty_mask_gives_no_instances():
    assert extract_instances(np.zeros((5, 5), dtype=np.int32), 1) == []


def test_two_labels_areas_match_histogram_oracle():
    mask = np.zeros((20, 20), dtype=np.int32)
    mask[2:4, 3:5] = 3  # area 4
    mask[10:13, 10:13] = 7  # area 9
    instances = extract_instances(mask, 1)
    assert [i.label for i in instances] == [3, 7]
    # independent per-label pixel histogram
    counts = Counter(int(v) for v in mask.ravel() if v)
    assert [i.area for i in instances] == [counts[3], counts[7]]
    assert counts[3] == 4 and counts[7] == 9


def test_area_sum_equals_nonzero_pixels():
    rng = np.random.default_rng(11)
    for _ in range(20):
        mask = rng.integers(0, 5, size=(16, 16)).astype(np.int32)
        instances = extract_instances(mask, 1)
        assert sum(i.area for i in instances) == int(np.count_nonzero(mask))


def test_extraction_is_deterministic():
    rng = np.random.default_rng(3)
    mask = rng.integers(0, 4, size=(12, 12)).astype(np.int32)
    assert extract_instances(mask, 2) == extract_instances(mask.copy(), 2)


def test_rectangle_centroid_is_geometric_center():
    mask = np.zeros((30, 40), dtype=np.int32)
    mask[5:11, 8:20] = 9  # rows 5..10, cols 8..19
    (inst,) = extract_instances(mask, 1)
    assert inst.centroid == ((8 + 19) / 2, (5 + 10) / 2)
    assert inst.area == 6 * 12


def test_centroid_inside_bounding_box():
    rng = np.random.default_rng(23)
    for _ in range(20):
        mask = (rng.random((10, 14)) < 0.3).astype(np.int32)
        for inst in extract_instances(mask, 1):
            x, y = inst.centroid
            assert 0 <= x <= 13 and 0 <= y <= 9


def test_filter_min_area_threshold():
    instances = [make_instance(i, (0, 0), area=a) for i, a in enumerate([3, 10, 50], 1)]
    kept = filter_min_area(instances, 10)
    assert [i.area for i in kept] == [10, 50]


def test_filter_min_area_zero_is_identity():
    instances = [make_instance(1, (0, 0), area=4)]
    assert filter_min_area(instances, 0) == instances


def test_filter_min_area_all_filtered():
    assert filter_min_area([make_instance(1, (0, 0), area=9)], 10) == []


def test_apply_min_area_zeroes_small_instances():
    mask = np.zeros((8, 8), dtype=np.int32)
    mask[0, 0] = 5  # area 1
    mask[3:6, 3:6] = 2  # area 9
    cleaned = apply_min_area(LabelMaskStack([mask]), 4)
    assert set(np.unique(cleaned.masks[0])) == {0, 2}
    assert mask[0, 0] == 5  # input untouched


def test_image_stack_rejects_mismatched_frames():
    with pytest.raises(ValueError):
        ImageStack([np.zeros((4, 4)), np.zeros((4, 5))])
    with pytest.raises(ValueError):
        ImageStack([])


def test_mask_stack_rejects_negative_and_float():
    with pytest.raises(ValueError):
        LabelMaskStack([np.full((3, 3), -1, dtype=np.int32)])
    with pytest.raises(ValueError):
        LabelMaskStack([np.zeros((3, 3), dtype=np.float32)])
