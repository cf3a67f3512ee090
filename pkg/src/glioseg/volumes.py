"""Core voxel-grid types shared by every other module.

Arrays are indexed [x, y, z] with x fastest on disk (NIfTI ordering).
All types are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Triple = tuple[float, float, float]


class GridMismatchError(ValueError):
    """Two grids that must be identical (shape + spacing) are not."""


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


def _check_spacing(spacing) -> Triple:
    spacing = tuple(float(s) for s in spacing)
    if len(spacing) != 3:
        raise ValueError(f"spacing must have 3 components, got {len(spacing)}")
    if not all(np.isfinite(s) and s > 0 for s in spacing):
        raise ValueError(f"spacing components must be finite and > 0, got {spacing}")
    return spacing


def _check_origin(origin) -> Triple:
    origin = tuple(float(o) for o in origin)
    if len(origin) != 3:
        raise ValueError(f"origin_offset must have 3 components, got {len(origin)}")
    if not all(np.isfinite(o) for o in origin):
        raise ValueError(f"origin_offset must be finite, got {origin}")
    return origin


@dataclass(frozen=True)
class Volume3D:
    """One scalar channel (MRI intensity or probability map) on a 3D grid."""

    voxels: np.ndarray  # float64 [X, Y, Z]
    spacing: Triple  # mm per voxel
    origin_offset: Triple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        vox = np.asarray(self.voxels, dtype=np.float64)
        if vox.ndim != 3:
            raise ValueError(f"voxels must be 3-dimensional, got ndim={vox.ndim}")
        if not np.isfinite(vox).all():
            raise ValueError("voxels contain non-finite values")
        object.__setattr__(self, "voxels", _freeze(vox))
        object.__setattr__(self, "spacing", _check_spacing(self.spacing))
        object.__setattr__(self, "origin_offset", _check_origin(self.origin_offset))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.voxels.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class MultiModalScan:
    """Exactly four co-registered channels: T1, T1 post-contrast, T2, FLAIR."""

    channels: tuple[Volume3D, Volume3D, Volume3D, Volume3D]

    def __post_init__(self):
        chans = tuple(self.channels)
        if len(chans) != 4:
            raise ValueError(f"MultiModalScan needs exactly 4 channels, got {len(chans)}")
        ref = chans[0]
        for i, c in enumerate(chans[1:], start=1):
            if c.shape != ref.shape or c.spacing != ref.spacing or c.origin_offset != ref.origin_offset:
                raise GridMismatchError(f"channel {i} grid differs from channel 0")
        object.__setattr__(self, "channels", chans)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.channels[0].shape

    @property
    def spacing(self) -> Triple:
        return self.channels[0].spacing


VALID_LABELS = (0, 1, 2, 3)


@dataclass(frozen=True)
class LabelMap:
    """Integer segmentation over the BraTS-Africa label set {0,1,2,3}."""

    labels: np.ndarray  # uint8 [X, Y, Z]
    spacing: Triple
    origin_offset: Triple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 3:
            raise ValueError(f"labels must be 3-dimensional, got ndim={lab.ndim}")
        if not np.isin(lab, VALID_LABELS).all():
            bad = sorted(set(np.unique(lab)) - set(VALID_LABELS))
            raise ValueError(f"labels outside {{0,1,2,3}}: {bad}")
        object.__setattr__(self, "labels", _freeze(lab.astype(np.uint8)))
        object.__setattr__(self, "spacing", _check_spacing(self.spacing))
        object.__setattr__(self, "origin_offset", _check_origin(self.origin_offset))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.labels.shape  # type: ignore[return-value]


@dataclass(frozen=True)
class RegionMask:
    """Boolean mask for one composite region (or any derived binary mask)."""

    bits: np.ndarray  # bool [X, Y, Z]
    spacing: Triple
    region_tag: str = ""
    origin_offset: Triple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 3:
            raise ValueError(f"bits must be 3-dimensional, got ndim={bits.ndim}")
        object.__setattr__(self, "bits", _freeze(bits.astype(bool)))
        object.__setattr__(self, "spacing", _check_spacing(self.spacing))
        object.__setattr__(self, "origin_offset", _check_origin(self.origin_offset))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.bits.shape  # type: ignore[return-value]


def require_same_grid(a, b) -> None:
    """Raise GridMismatchError unless a and b share shape and spacing."""
    if a.shape != b.shape:
        raise GridMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    if tuple(a.spacing) != tuple(b.spacing):
        raise GridMismatchError(f"spacing mismatch: {a.spacing} vs {b.spacing}")


def voxel_count(mask: RegionMask) -> int:
    """Number of true voxels in the mask."""
    return int(mask.bits.sum())


def physical_volume_mm3(mask: RegionMask) -> float:
    """Physical volume of the mask: voxel count times voxel volume in mm^3."""
    sx, sy, sz = mask.spacing
    return voxel_count(mask) * sx * sy * sz


def complement(mask: RegionMask) -> RegionMask:
    """Mask with every bit flipped, on the same grid."""
    return RegionMask(~mask.bits, mask.spacing, mask.region_tag, mask.origin_offset)
