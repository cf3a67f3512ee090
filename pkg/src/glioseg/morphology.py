"""Binary 3D mask machinery: connected components, surfaces, exact EDT, dilation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .volumes import RegionMask, Triple

CONNECTIVITIES = (6, 18, 26)


@dataclass(frozen=True)
class ComponentLabeling:
    """Connected-component decomposition of a binary mask.

    component_ids holds 0 on background and 1..count on foreground; ids are
    assigned by first encounter in C scan order, so labeling is deterministic.
    """

    component_ids: np.ndarray  # int32 [X, Y, Z]
    count: int
    sizes: np.ndarray  # int64 [count], sizes[i] is the size of component i+1

    def component_mask(self, cid: int, spacing: Triple) -> RegionMask:
        return RegionMask(self.component_ids == cid, spacing)


@dataclass(frozen=True)
class DistanceField:
    """Per-voxel distance (mm) to the nearest source voxel center."""

    values: np.ndarray  # float64 [X, Y, Z]; +inf everywhere when source empty
    spacing: Triple


def neighbor_offsets(connectivity: int) -> list[tuple[int, int, int]]:
    if connectivity not in CONNECTIVITIES:
        raise ValueError(f"connectivity must be one of {CONNECTIVITIES}, got {connectivity}")
    offs = []
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            for dz in (-1, 0, 1):
                order = abs(dx) + abs(dy) + abs(dz)
                if order == 0:
                    continue
                if connectivity == 6 and order > 1:
                    continue
                if connectivity == 18 and order > 2:
                    continue
                offs.append((dx, dy, dz))
    return offs


def connected_components(mask: RegionMask, connectivity: int = 26) -> ComponentLabeling:
    """Label connected foreground components with a two-pass union-find scan."""
    bits = mask.bits
    prior = [o for o in neighbor_offsets(connectivity) if o < (0, 0, 0)]
    nx, ny, nz = bits.shape
    ids = np.zeros(bits.shape, dtype=np.int32)
    parent = [0]  # union-find over provisional labels, 1-based

    def find(a: int) -> int:
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:  # path compression
            parent[a], a = root, parent[a]
        return root

    xs, ys, zs = np.nonzero(bits)  # C scan order
    for x, y, z in zip(xs.tolist(), ys.tolist(), zs.tolist()):
        best = 0
        for dx, dy, dz in prior:
            px, py, pz = x + dx, y + dy, z + dz
            if 0 <= px < nx and 0 <= py < ny and 0 <= pz < nz:
                lab = ids[px, py, pz]
                if lab:
                    root = find(lab)
                    if best == 0:
                        best = root
                    elif root != best:
                        if root < best:
                            parent[best] = root
                            best = root
                        else:
                            parent[root] = best
        if best == 0:
            parent.append(len(parent))
            best = len(parent) - 1
        ids[x, y, z] = best

    # Relabel roots by first encounter; a component's first voxel always opens
    # a fresh provisional label, so the minimal provisional label per root
    # orders components in scan order.
    remap = np.zeros(len(parent), dtype=np.int32)
    count = 0
    for lab in range(1, len(parent)):
        root = find(lab)
        if remap[root] == 0:
            count += 1
            remap[root] = count
        remap[lab] = remap[root]
    ids = remap[ids]
    sizes = np.bincount(ids.ravel(), minlength=count + 1)[1:].astype(np.int64)
    return ComponentLabeling(ids, count, sizes)


def surface_voxels(mask: RegionMask) -> RegionMask:
    """Foreground voxels with a background (or out-of-grid) 6-neighbor."""
    bits = mask.bits
    padded = np.pad(bits, 1, mode="constant", constant_values=False)
    interior = (
        padded[:-2, 1:-1, 1:-1] & padded[2:, 1:-1, 1:-1]
        & padded[1:-1, :-2, 1:-1] & padded[1:-1, 2:, 1:-1]
        & padded[1:-1, 1:-1, :-2] & padded[1:-1, 1:-1, 2:]
    )
    return RegionMask(bits & ~interior, mask.spacing, mask.region_tag, mask.origin_offset)


def _envelope_1d(f: np.ndarray, s: float) -> np.ndarray:
    """Exact 1D squared-distance transform (lower envelope of parabolas).

    f holds squared distances at sample points spaced s mm apart; entries may
    be +inf (no source reachable yet).
    """
    n = f.shape[0]
    finite = np.isfinite(f)
    if not finite.any():
        return f
    x = s * np.arange(n)
    v = np.zeros(n, dtype=np.intp)  # parabola apex indices
    z = np.empty(n + 1)  # envelope breakpoints
    k = -1
    for q in range(n):
        fq = f[q]
        if not np.isfinite(fq):
            continue
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -np.inf
            z[1] = np.inf
            continue
        while True:
            p = v[k]
            cut = (fq + x[q] ** 2 - f[p] - x[p] ** 2) / (2.0 * (x[q] - x[p]))
            if cut > z[k]:
                break
            k -= 1
        k += 1
        v[k] = q
        z[k] = cut
        z[k + 1] = np.inf
    out = np.empty(n)
    j = 0
    for q in range(n):
        while z[j + 1] < x[q]:
            j += 1
        out[q] = f[v[j]] + (x[q] - x[v[j]]) ** 2
    return out


def _edt_pass(d2: np.ndarray, axis: int, s: float) -> np.ndarray:
    moved = np.moveaxis(d2, axis, -1)
    flat = np.ascontiguousarray(moved).reshape(-1, moved.shape[-1])
    for i in range(flat.shape[0]):
        flat[i] = _envelope_1d(flat[i], s)
    return np.moveaxis(flat.reshape(moved.shape), -1, axis)


def distance_transform(source: RegionMask) -> DistanceField:
    """Exact anisotropic Euclidean distance (mm) to the nearest source voxel center."""
    d2 = np.where(source.bits, 0.0, np.inf)
    for axis, s in enumerate(source.spacing):
        d2 = _edt_pass(d2, axis, s)
    return DistanceField(np.sqrt(d2), source.spacing)


def dilate_mask(mask: RegionMask, radius_vox: int) -> RegionMask:
    """Chebyshev dilation: true within radius_vox voxels (per axis) of the mask."""
    if radius_vox < 0:
        raise ValueError(f"radius_vox must be >= 0, got {radius_vox}")
    if radius_vox == 0 or not mask.bits.any():
        return mask
    size = 2 * radius_vox + 1
    grown = ndimage.maximum_filter(mask.bits.astype(np.uint8), size=size, mode="constant", cval=0)
    return RegionMask(grown > 0, mask.spacing, mask.region_tag, mask.origin_offset)
