"""Toolkit for quantifying the real-to-simulated perception gap.

Library surface: domain types and manifest/feature-file ingestion, the
nuScenes-protocol detection evaluation, online-mapping evaluation, the
symmetric Detection Agreement metric, rendering-artifact image augmentation,
ego-pose perturbation transforms, image reconstruction metrics including the
Fréchet feature distance, and per-scene correlation analysis.  The ``r2s``
command line exposes the same operations on files.
"""

__version__ = "0.1.0"

from .agreement import (
    AgreementConfig,
    agreement_range_curve,
    detection_agreement,
    map_agreement,
)
from .augment import AugmentConfig, MixingPlan, augment_image, plan_mixing
from .deteval import (
    DetEvalConfig,
    DetEvalReport,
    TPErrors,
    average_precision,
    evaluate_detections,
    gap_percent,
    match_class,
    nds,
    tp_error_metrics,
)
from .errors import Real2SimError
from .fvec import load_feature_set, save_feature_set
from .geom import EgoPerturbation, perturb_pose, transform_boxes, transform_polylines
from .imgmetrics import aggregate_scene, frechet_distance, psnr, ssim
from .manifest import load_manifest, save_manifest
from .mapeval import MapEvalConfig, chamfer_distance, evaluate_map, resample_polyline
from .types import (
    DetectionBox3D,
    FeatureSet,
    FrameRecord,
    MapPolyline,
    Pose,
    SceneManifest,
    Variant,
)
from .analysis import CorrelationResult, gap_table, pearson, spearman
from .svgplot import scatter_svg

__all__ = [
    "AgreementConfig",
    "AugmentConfig",
    "CorrelationResult",
    "DetEvalConfig",
    "DetEvalReport",
    "DetectionBox3D",
    "EgoPerturbation",
    "FeatureSet",
    "FrameRecord",
    "MapEvalConfig",
    "MapPolyline",
    "MixingPlan",
    "Pose",
    "Real2SimError",
    "SceneManifest",
    "TPErrors",
    "Variant",
    "aggregate_scene",
    "agreement_range_curve",
    "augment_image",
    "average_precision",
    "chamfer_distance",
    "detection_agreement",
    "evaluate_detections",
    "evaluate_map",
    "frechet_distance",
    "gap_percent",
    "gap_table",
    "load_feature_set",
    "load_manifest",
    "map_agreement",
    "match_class",
    "nds",
    "pearson",
    "perturb_pose",
    "plan_mixing",
    "psnr",
    "resample_polyline",
    "save_feature_set",
    "save_manifest",
    "scatter_svg",
    "spearman",
    "ssim",
    "tp_error_metrics",
    "transform_boxes",
    "transform_polylines",
]
