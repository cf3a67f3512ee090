"""BraTS composite regions and the two-model hybrid fusion rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .volumes import LabelMap, RegionMask, require_same_grid


@dataclass(frozen=True)
class RegionDef:
    """A named region as a set of raw labels."""

    tag: str
    label_set: frozenset[int]

    def __post_init__(self):
        labels = frozenset(int(v) for v in self.label_set)
        if not labels or not labels <= {1, 2, 3}:
            raise ValueError(f"label_set must be a nonempty subset of {{1,2,3}}, got {set(self.label_set)}")
        object.__setattr__(self, "label_set", labels)


# Standard BraTS composition: nested supersets ET < TC < WT.
ET = RegionDef("ET", frozenset({1}))
TC = RegionDef("TC", frozenset({1, 2}))
WT = RegionDef("WT", frozenset({1, 2, 3}))
REGIONS = (ET, TC, WT)


def compose_region(labels: LabelMap, region: RegionDef) -> RegionMask:
    """Boolean mask of the voxels whose label belongs to the region."""
    bits = np.isin(labels.labels, sorted(region.label_set))
    return RegionMask(bits, labels.spacing, region.tag, labels.origin_offset)


def labelmap_from_regions(et: RegionMask, tc: RegionMask, wt: RegionMask) -> LabelMap:
    """Inverse of compose_region for the standard nested regions.

    Requires et <= tc <= wt as voxel sets; assigns 1 on et, 2 on tc\\et,
    3 on wt\\tc, 0 elsewhere.
    """
    require_same_grid(et, tc)
    require_same_grid(tc, wt)
    if (et.bits & ~tc.bits).any():
        raise ValueError("nesting violation: ET not contained in TC")
    if (tc.bits & ~wt.bits).any():
        raise ValueError("nesting violation: TC not contained in WT")
    out = np.zeros(et.shape, dtype=np.uint8)
    out[wt.bits] = 3
    out[tc.bits] = 2
    out[et.bits] = 1
    return LabelMap(out, et.spacing, et.origin_offset)


def hybrid_fuse(pred_a: LabelMap, pred_b: LabelMap) -> LabelMap:
    """Fuse two models' label maps: ET and TC from model A, WT from model B.

    WT is unioned with model A's TC so the output stays nested even when A's
    core extends beyond B's whole tumor.
    """
    require_same_grid(pred_a, pred_b)
    et_a = compose_region(pred_a, ET)
    tc_a = compose_region(pred_a, TC)
    wt_b = compose_region(pred_b, WT)
    wt_f = RegionMask(wt_b.bits | tc_a.bits, pred_a.spacing, "WT", pred_a.origin_offset)
    return labelmap_from_regions(et_a, tc_a, wt_f)
