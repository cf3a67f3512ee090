"""Glioma segmentation evaluation toolkit.

Volumes and NIfTI-1 I/O, BraTS composite-region metrics (Dice, NSD,
lesion-wise variants), two-model hybrid fusion, preprocessing, polynomial LR
schedules, and training-curve phase detection.
"""

from .report import TOOL_VERSION as __version__

from .volumes import (
    GridMismatchError,
    LabelMap,
    MultiModalScan,
    RegionMask,
    Volume3D,
    complement,
    physical_volume_mm3,
    voxel_count,
)
from .nifti import NiftiFormatError, NiftiHeader, parse_nifti, read_nifti_file, write_nifti, write_nifti_file
from .regions import ET, TC, WT, RegionDef, compose_region, hybrid_fuse, labelmap_from_regions
from .morphology import (
    ComponentLabeling,
    DistanceField,
    connected_components,
    dilate_mask,
    distance_transform,
    surface_voxels,
)
from .metrics import (
    AggregateReport,
    CaseScores,
    LesionwiseParams,
    aggregate_cases,
    dice,
    evaluate_case,
    lesionwise,
    lesionwise_dice,
    lesionwise_nsd,
    nsd,
    soft_dice_ce_loss,
)
from .preprocess import ResamplePlan, infer_brain_mask, resample, resample_labels, zscore_normalize
from .schedules import (
    CurvePhases,
    TrainingConfig,
    baseline_config,
    build_schedule,
    detect_phases,
    extended_config,
    poly_lr_at,
)
from .report import ReportDocument, emit_report
