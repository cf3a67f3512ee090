"""Segmentation scores: Dice, NSD at tolerances, lesion-wise variants,
the Dice + cross-entropy training loss, and cross-case aggregation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .morphology import CONNECTIVITIES, connected_components, dilate_mask, distance_transform, surface_voxels
from .regions import REGIONS, compose_region
from .volumes import LabelMap, RegionMask, require_same_grid

DEFAULT_TOLERANCES_MM = (0.5, 1.0)

# Slack absorbing float noise when a surface distance lands exactly on the tolerance.
_NSD_TOLERANCE_SLACK_MM = 1e-9

# Smoothing term of the soft Dice loss.
_DICE_EPS = 1e-5
_PROB_SUM_TOL = 1e-6
_LOG_CLAMP = 1e-12


@dataclass(frozen=True)
class LesionwiseParams:
    """Lesion matching protocol parameters (BraTS lesion-wise convention)."""

    connectivity: int = 26
    dilation_radius_vox: int = 3
    min_lesion_size_vox: int = 0

    def __post_init__(self):
        if self.connectivity not in CONNECTIVITIES:
            raise ValueError(f"connectivity must be one of {CONNECTIVITIES}")
        if self.dilation_radius_vox < 0 or self.min_lesion_size_vox < 0:
            raise ValueError("dilation radius and min lesion size must be >= 0")


def dice(pred: RegionMask, gt: RegionMask) -> float:
    """Overlap score 2|P∩G|/(|P|+|G|); 1.0 when both empty, 0.0 when one is."""
    require_same_grid(pred, gt)
    np_, ng = int(pred.bits.sum()), int(gt.bits.sum())
    if np_ + ng == 0:
        return 1.0
    inter = int((pred.bits & gt.bits).sum())
    return 2.0 * inter / (np_ + ng)


def nsd(pred: RegionMask, gt: RegionMask, tolerance_mm: float) -> float:
    """Normalised Surface Dice: fraction of boundary voxels of either mask
    lying within tolerance_mm of the other mask's boundary."""
    require_same_grid(pred, gt)
    if tolerance_mm <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance_mm}")
    sp = surface_voxels(pred)
    sg = surface_voxels(gt)
    n_sp, n_sg = int(sp.bits.sum()), int(sg.bits.sum())
    if n_sp + n_sg == 0:
        return 1.0
    if n_sp == 0 or n_sg == 0:
        return 0.0
    tau = tolerance_mm + _NSD_TOLERANCE_SLACK_MM
    dist_to_gt = distance_transform(sg).values
    dist_to_pred = distance_transform(sp).values
    hits = int((dist_to_gt[sp.bits] <= tau).sum()) + int((dist_to_pred[sg.bits] <= tau).sum())
    return hits / (n_sp + n_sg)


def lesionwise(
    pred: RegionMask,
    gt: RegionMask,
    base_metric: Callable[[RegionMask, RegionMask], float],
    params: LesionwiseParams = LesionwiseParams(),
) -> float:
    """Per-lesion score: each GT lesion is scored against the union of pred
    components hitting its dilation; unmatched pred components count as zeros.
    """
    require_same_grid(pred, gt)
    comp_g = connected_components(gt, params.connectivity)
    comp_p = connected_components(pred, params.connectivity)

    keep_g = [i for i in range(1, comp_g.count + 1) if comp_g.sizes[i - 1] >= params.min_lesion_size_vox]
    keep_p = [i for i in range(1, comp_p.count + 1) if comp_p.sizes[i - 1] >= params.min_lesion_size_vox]
    if not keep_g:
        return 1.0 if not keep_p else 0.0

    pred_ids = comp_p.component_ids
    matched: set[int] = set()
    scores = []
    for gid in keep_g:
        gmask = RegionMask(comp_g.component_ids == gid, gt.spacing)
        halo = dilate_mask(gmask, params.dilation_radius_vox)
        hit_ids = set(np.unique(pred_ids[halo.bits]).tolist()) & set(keep_p)
        hit_ids.discard(0)
        matched |= hit_ids
        union = np.isin(pred_ids, sorted(hit_ids)) if hit_ids else np.zeros_like(gmask.bits)
        scores.append(base_metric(RegionMask(union, pred.spacing), gmask))
    false_positives = len(set(keep_p) - matched)
    return float(sum(scores)) / (len(keep_g) + false_positives)


def lesionwise_dice(pred: RegionMask, gt: RegionMask, params: LesionwiseParams = LesionwiseParams()) -> float:
    return lesionwise(pred, gt, dice, params)


def lesionwise_nsd(
    pred: RegionMask, gt: RegionMask, tolerance_mm: float, params: LesionwiseParams = LesionwiseParams()
) -> float:
    return lesionwise(pred, gt, lambda p, g: nsd(p, g, tolerance_mm), params)


def dice_ce_components(probs: np.ndarray, gt: LabelMap) -> tuple[float, float]:
    """(cross_entropy, dice_loss) of 4-class probability volumes against labels.

    probs has shape (4, nx, ny, nz) and must sum to 1 per voxel within 1e-6;
    the Dice term averages the three foreground classes with smoothing 1e-5.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 4 or probs.shape[0] != 4:
        raise ValueError(f"probs must have shape (4, nx, ny, nz), got {probs.shape}")
    if probs.shape[1:] != gt.shape:
        raise ValueError(f"probability grid {probs.shape[1:]} does not match labels {gt.shape}")
    sums = probs.sum(axis=0)
    if not (np.abs(sums - 1.0) <= _PROB_SUM_TOL).all():
        worst = float(np.abs(sums - 1.0).max())
        raise ValueError(f"per-voxel probabilities must sum to 1 within {_PROB_SUM_TOL} (worst dev {worst:.3g})")

    labels = gt.labels
    p_true = np.take_along_axis(probs, labels[np.newaxis].astype(np.intp), axis=0)[0]
    ce = float(np.mean(-np.log(np.clip(p_true, _LOG_CLAMP, 1.0))))

    dice_terms = []
    for cls in (1, 2, 3):
        g = (labels == cls).astype(np.float64)
        p = probs[cls]
        num = 2.0 * float((p * g).sum()) + _DICE_EPS
        den = float(p.sum()) + float(g.sum()) + _DICE_EPS
        dice_terms.append(1.0 - num / den)
    return ce, float(np.mean(dice_terms))


def soft_dice_ce_loss(probs: np.ndarray, gt: LabelMap) -> float:
    """Dice + cross-entropy combination over 4-class probabilities."""
    ce, dice_loss = dice_ce_components(probs, gt)
    return ce + dice_loss


@dataclass(frozen=True)
class RegionScores:
    """All scores of one region for one case."""

    dice: float
    nsd: dict[float, float]
    lw_dice: float
    lw_nsd: dict[float, float]


@dataclass(frozen=True)
class CaseScores:
    case_id: str
    regions: dict[str, RegionScores]  # keys ET, TC, WT

    @property
    def tolerances(self) -> tuple[float, ...]:
        first = next(iter(self.regions.values()))
        return tuple(sorted(first.nsd))


@dataclass(frozen=True)
class AggregateReport:
    """Mean (and, for lesion-wise rows, sample std) per metric and region."""

    case_count: int
    means: dict[str, dict[str, float]]  # metric row name -> region -> mean
    stds: dict[str, dict[str, float]]  # lesion-wise rows only


def metric_row_names(tolerances) -> list[str]:
    rows = ["Dice coefficient", "LW Dice"]
    for tol in sorted(tolerances):
        rows.append(f"NSD {tol:g} mm")
    for tol in sorted(tolerances):
        rows.append(f"LW NSD {tol:g} mm")
    return rows


def evaluate_case(
    pred: LabelMap,
    gt: LabelMap,
    tolerances=DEFAULT_TOLERANCES_MM,
    params: LesionwiseParams = LesionwiseParams(),
    case_id: str = "",
) -> CaseScores:
    """All region scores for one prediction/reference pair."""
    require_same_grid(pred, gt)
    tolerances = tuple(sorted(float(t) for t in tolerances))
    regions: dict[str, RegionScores] = {}
    for region in REGIONS:
        p = compose_region(pred, region)
        g = compose_region(gt, region)
        regions[region.tag] = RegionScores(
            dice=dice(p, g),
            nsd={tol: nsd(p, g, tol) for tol in tolerances},
            lw_dice=lesionwise_dice(p, g, params),
            lw_nsd={tol: lesionwise_nsd(p, g, tol, params) for tol in tolerances},
        )
    return CaseScores(case_id=case_id, regions=regions)


def _case_value(case: CaseScores, row: str, tag: str) -> float:
    rs = case.regions[tag]
    if row == "Dice coefficient":
        return rs.dice
    if row == "LW Dice":
        return rs.lw_dice
    lw = row.startswith("LW NSD")
    parsed = float(row.split()[-2])
    tol = min(case.tolerances, key=lambda t: abs(t - parsed))  # undo %g rounding
    return rs.lw_nsd[tol] if lw else rs.nsd[tol]


def aggregate_cases(cases: list[CaseScores]) -> AggregateReport:
    """Arithmetic mean per metric and region; sample std (n-1) for LW rows."""
    if not cases:
        raise ValueError("no cases to aggregate")
    tolerances = cases[0].tolerances
    for c in cases[1:]:
        if c.tolerances != tolerances:
            raise ValueError(f"inconsistent tolerance sets: {c.tolerances} vs {tolerances}")
    rows = metric_row_names(tolerances)
    tags = [r.tag for r in REGIONS]
    means: dict[str, dict[str, float]] = {}
    stds: dict[str, dict[str, float]] = {}
    for row in rows:
        means[row] = {}
        if row.startswith("LW"):
            stds[row] = {}
        for tag in tags:
            # sorted so aggregation is bit-identical under case reordering
            vals = np.sort([_case_value(c, row, tag) for c in cases])
            means[row][tag] = float(vals.mean())
            if row.startswith("LW"):
                stds[row][tag] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    return AggregateReport(case_count=len(cases), means=means, stds=stds)
