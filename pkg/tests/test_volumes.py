import numpy as np
import pytest

from glioseg import (
    GridMismatchError,
    LabelMap,
    MultiModalScan,
    RegionMask,
    Volume3D,
    complement,
    physical_volume_mm3,
    voxel_count,
)
from glioseg.volumes import require_same_grid

from conftest import random_mask


def test_volume_rejects_nan():
    vox = np.zeros((2, 2, 2))
    vox[0, 0, 0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        Volume3D(vox, (1, 1, 1))


def test_volume_rejects_bad_spacing():
    with pytest.raises(ValueError):
        Volume3D(np.zeros((2, 2, 2)), (1, 0, 1))
    with pytest.raises(ValueError):
        Volume3D(np.zeros((2, 2, 2)), (1, -1, 1))
    with pytest.raises(ValueError):
        Volume3D(np.zeros((2, 2, 2)), (1, np.inf, 1))


def test_volume_rejects_wrong_rank():
    with pytest.raises(ValueError):
        Volume3D(np.zeros((2, 2)), (1, 1, 1))


def test_volume_is_immutable():
    v = Volume3D(np.zeros((2, 2, 2)), (1, 1, 1))
    with pytest.raises(ValueError):
        v.voxels[0, 0, 0] = 1.0


def test_labelmap_rejects_out_of_range():
    with pytest.raises(ValueError, match="labels outside"):
        LabelMap(np.full((2, 2, 2), 4, dtype=np.int16), (1, 1, 1))


def test_multimodal_needs_four_matching_channels():
    v = Volume3D(np.zeros((2, 2, 2)), (1, 1, 1))
    with pytest.raises(ValueError):
        MultiModalScan((v, v, v))
    other = Volume3D(np.zeros((2, 2, 3)), (1, 1, 1))
    with pytest.raises(GridMismatchError):
        MultiModalScan((v, v, v, other))
    scan = MultiModalScan((v, v, v, v))
    assert scan.shape == (2, 2, 2)


def test_voxel_count_trivial():
    empty = RegionMask(np.zeros((4, 4, 4), dtype=bool), (1, 1, 1))
    assert voxel_count(empty) == 0
    full = RegionMask(np.ones((2, 2, 2), dtype=bool), (1, 1, 1))
    assert voxel_count(full) == 8


def test_voxel_count_matches_enumeration(rng):
    mask = random_mask(rng, shape=(5, 5, 5))
    expected = sum(1 for idx in np.ndindex(mask.shape) if mask.bits[idx])
    assert voxel_count(mask) == expected


def test_physical_volume_trivial():
    bits = np.zeros((4, 4, 4), dtype=bool)
    bits[:2, :2, :2] = True
    assert physical_volume_mm3(RegionMask(bits, (1, 1, 2))) == 16.0
    assert physical_volume_mm3(RegionMask(np.zeros((3, 3, 3), dtype=bool), (1, 1, 1))) == 0.0


def test_physical_volume_matches_per_voxel_sum(rng):
    spacing = tuple(rng.uniform(0.3, 2.5, size=3))
    mask = random_mask(rng, spacing=spacing)
    per_voxel = sum(np.prod(spacing) for idx in np.ndindex(mask.shape) if mask.bits[idx])
    assert physical_volume_mm3(mask) == pytest.approx(per_voxel, rel=1e-12)


def test_complement_partitions_grid(rng):
    for _ in range(20):
        mask = random_mask(rng)
        assert voxel_count(mask) + voxel_count(complement(mask)) == np.prod(mask.shape)


def test_volume_additive_on_disjoint_union(rng):
    a = random_mask(rng, spacing=(0.7, 1.1, 1.3))
    b_bits = ~a.bits & (rng.random(a.shape) < 0.5)
    b = RegionMask(b_bits, a.spacing)
    union = RegionMask(a.bits | b.bits, a.spacing)
    assert physical_volume_mm3(union) == pytest.approx(
        physical_volume_mm3(a) + physical_volume_mm3(b), rel=1e-12
    )


def test_require_same_grid():
    a = RegionMask(np.zeros((2, 2, 2), dtype=bool), (1, 1, 1))
    b = RegionMask(np.zeros((2, 2, 2), dtype=bool), (1, 1, 2))
    with pytest.raises(GridMismatchError, match="spacing"):
        require_same_grid(a, b)
    c = RegionMask(np.zeros((3, 2, 2), dtype=bool), (1, 1, 1))
    with pytest.raises(GridMismatchError, match="shape"):
        require_same_grid(a, c)
