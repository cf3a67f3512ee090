"""Preprocessing: resampling to a common voxel spacing and z-score
normalization of brain voxels (background stays exactly zero)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .volumes import LabelMap, MultiModalScan, RegionMask, Triple, Volume3D, require_same_grid

RESAMPLE_MODES = ("trilinear", "nearest")

# Below this population std the masked volume is treated as constant and
# normalizes to zeros.
DEGENERATE_STD = 1e-8


@dataclass(frozen=True)
class ResamplePlan:
    target_spacing: Triple
    mode: str = "trilinear"

    def __post_init__(self):
        ts = tuple(float(s) for s in self.target_spacing)
        if len(ts) != 3 or not all(np.isfinite(s) and s > 0 for s in ts):
            raise ValueError(f"target_spacing must be 3 positive finite values, got {self.target_spacing}")
        if self.mode not in RESAMPLE_MODES:
            raise ValueError(f"mode must be one of {RESAMPLE_MODES}, got {self.mode!r}")
        object.__setattr__(self, "target_spacing", ts)

    def output_shape(self, shape: tuple[int, int, int], spacing: Triple) -> tuple[int, int, int]:
        # round half up, never below one voxel
        return tuple(
            max(1, int(np.floor(n * s / t + 0.5))) for n, s, t in zip(shape, spacing, self.target_spacing)
        )


def _axis_coords(n_out: int, t: float, s: float) -> np.ndarray:
    """Continuous input-voxel coordinates of output voxel centers along one axis."""
    centers_mm = (np.arange(n_out) + 0.5) * t
    return centers_mm / s - 0.5


def resample(volume: Volume3D, plan: ResamplePlan) -> Volume3D:
    """Trilinear resample with voxel-center alignment and edge clamping."""
    if plan.mode != "trilinear":
        raise ValueError("continuous volumes require mode='trilinear'")
    if plan.target_spacing == volume.spacing:
        return volume
    out_shape = plan.output_shape(volume.shape, volume.spacing)

    lo_idx, hi_idx, hi_w = [], [], []
    for axis in range(3):
        c = _axis_coords(out_shape[axis], plan.target_spacing[axis], volume.spacing[axis])
        c = np.clip(c, 0.0, volume.shape[axis] - 1)
        lo = np.floor(c).astype(np.intp)
        hi = np.minimum(lo + 1, volume.shape[axis] - 1)
        lo_idx.append(lo)
        hi_idx.append(hi)
        hi_w.append(c - lo)

    vox = volume.voxels
    out = np.zeros(out_shape)
    for cx in (0, 1):
        wx = (hi_w[0] if cx else 1.0 - hi_w[0])[:, None, None]
        ix = hi_idx[0] if cx else lo_idx[0]
        for cy in (0, 1):
            wy = (hi_w[1] if cy else 1.0 - hi_w[1])[None, :, None]
            iy = hi_idx[1] if cy else lo_idx[1]
            for cz in (0, 1):
                wz = (hi_w[2] if cz else 1.0 - hi_w[2])[None, None, :]
                iz = hi_idx[2] if cz else lo_idx[2]
                out += wx * wy * wz * vox[np.ix_(ix, iy, iz)]
    return Volume3D(out, plan.target_spacing, volume.origin_offset)


def resample_labels(labels: LabelMap, plan: ResamplePlan) -> LabelMap:
    """Nearest-neighbor resample; ties between input centers break upward."""
    if plan.mode != "nearest":
        raise ValueError("label maps require mode='nearest'")
    if plan.target_spacing == labels.spacing:
        return labels
    out_shape = plan.output_shape(labels.shape, labels.spacing)
    idx = []
    for axis in range(3):
        c = _axis_coords(out_shape[axis], plan.target_spacing[axis], labels.spacing[axis])
        nearest = np.floor(c + 0.5).astype(np.intp)
        idx.append(np.clip(nearest, 0, labels.shape[axis] - 1))
    out = labels.labels[np.ix_(*idx)]
    return LabelMap(out, plan.target_spacing, labels.origin_offset)


def infer_brain_mask(scan: MultiModalScan) -> RegionMask:
    """Brain mask: voxels where any channel is nonzero."""
    bits = np.zeros(scan.shape, dtype=bool)
    for channel in scan.channels:
        bits |= channel.voxels != 0
    return RegionMask(bits, scan.spacing, "BRAIN", scan.channels[0].origin_offset)


def zscore_normalize(volume: Volume3D, brain: RegionMask) -> Volume3D:
    """Zero-mean, unit-std (population) inside the mask; exact zeros outside.

    A mask that is empty or has std below DEGENERATE_STD normalizes to zeros.
    """
    require_same_grid(volume, brain)
    out = np.zeros(volume.shape)
    masked = volume.voxels[brain.bits]
    if masked.size:
        std = float(masked.std())  # population std
        if std >= DEGENERATE_STD:
            out[brain.bits] = (masked - masked.mean()) / std
    return Volume3D(out, volume.spacing, volume.origin_offset)
