"""Independent brute-force reference implementations used as test oracles.

Everything here is written for clarity over speed and deliberately avoids the
library's own algorithms: flood fill instead of union-find, all-pairs
distances instead of separable transforms, per-voxel loops instead of
vectorized passes.
"""

from __future__ import annotations

import numpy as np


def offsets(connectivity: int):
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


def flood_components(bits: np.ndarray, connectivity: int) -> np.ndarray:
    """Stack-based flood fill labeling (ids arbitrary but consistent)."""
    nx, ny, nz = bits.shape
    ids = np.zeros(bits.shape, dtype=np.int32)
    offs = offsets(connectivity)
    next_id = 0
    for seed in np.argwhere(bits):
        if ids[tuple(seed)]:
            continue
        next_id += 1
        stack = [tuple(seed)]
        ids[tuple(seed)] = next_id
        while stack:
            x, y, z = stack.pop()
            for dx, dy, dz in offs:
                p = (x + dx, y + dy, z + dz)
                if 0 <= p[0] < nx and 0 <= p[1] < ny and 0 <= p[2] < nz:
                    if bits[p] and not ids[p]:
                        ids[p] = next_id
                        stack.append(p)
    return ids


def brute_surface(bits: np.ndarray) -> np.ndarray:
    nx, ny, nz = bits.shape
    out = np.zeros_like(bits)
    for x, y, z in np.argwhere(bits):
        for dx, dy, dz in offsets(6):
            p = (x + dx, y + dy, z + dz)
            if not (0 <= p[0] < nx and 0 <= p[1] < ny and 0 <= p[2] < nz) or not bits[p]:
                out[x, y, z] = True
                break
    return out


def allpairs_distance(bits: np.ndarray, spacing) -> np.ndarray:
    """Distance (mm) from every voxel center to the nearest source center."""
    out = np.full(bits.shape, np.inf)
    sources = np.argwhere(bits).astype(np.float64) * np.asarray(spacing)
    if len(sources) == 0:
        return out
    for idx in np.ndindex(bits.shape):
        point = np.asarray(idx, dtype=np.float64) * np.asarray(spacing)
        out[idx] = np.sqrt(((sources - point) ** 2).sum(axis=1).min())
    return out


def brute_dilate(bits: np.ndarray, radius: int) -> np.ndarray:
    """Union of Chebyshev balls of the given voxel radius."""
    nx, ny, nz = bits.shape
    out = np.zeros_like(bits)
    for x, y, z in np.argwhere(bits):
        out[
            max(0, x - radius) : min(nx, x + radius + 1),
            max(0, y - radius) : min(ny, y + radius + 1),
            max(0, z - radius) : min(nz, z + radius + 1),
        ] = True
    return out


def brute_dice(p: np.ndarray, g: np.ndarray) -> float:
    total = int(p.sum()) + int(g.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((p & g).sum()) / total


def brute_nsd(p: np.ndarray, g: np.ndarray, spacing, tol: float) -> float:
    sp = brute_surface(p)
    sg = brute_surface(g)
    n_sp, n_sg = int(sp.sum()), int(sg.sum())
    if n_sp + n_sg == 0:
        return 1.0
    if n_sp == 0 or n_sg == 0:
        return 0.0
    dist_g = allpairs_distance(sg, spacing)
    dist_p = allpairs_distance(sp, spacing)
    slack = tol + 1e-9
    hits = int((dist_g[sp] <= slack).sum()) + int((dist_p[sg] <= slack).sum())
    return hits / (n_sp + n_sg)


def brute_lesionwise(p: np.ndarray, g: np.ndarray, spacing, base, connectivity=26, radius=3, min_size=0) -> float:
    """base(p_union, g_lesion) per GT lesion; unmatched pred lesions score 0."""
    ids_g = flood_components(g, connectivity)
    ids_p = flood_components(p, connectivity)
    gt_ids = [i for i in range(1, ids_g.max() + 1) if (ids_g == i).sum() >= min_size]
    pred_ids = [i for i in range(1, ids_p.max() + 1) if (ids_p == i).sum() >= min_size]
    if not gt_ids:
        return 1.0 if not pred_ids else 0.0
    matched = set()
    scores = []
    for gid in gt_ids:
        lesion = ids_g == gid
        halo = brute_dilate(lesion, radius)
        hits = {int(i) for i in np.unique(ids_p[halo]) if i != 0 and i in pred_ids}
        matched |= hits
        union = np.isin(ids_p, sorted(hits)) if hits else np.zeros_like(lesion)
        scores.append(base(union, lesion))
    fp = len(set(pred_ids) - matched)
    return sum(scores) / (len(gt_ids) + fp)
