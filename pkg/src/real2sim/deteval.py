"""3D detection evaluation: greedy matching, AP, TP error metrics, NDS.

Follows the nuScenes object-detection protocol: predictions are pooled per
class across frames, processed in descending score order, and matched to the
nearest unmatched ground-truth box in the same frame by BEV center distance.
AP integrates a 101-point monotone-max interpolated precision/recall curve
with the protocol's 10% recall/precision clipping; NDS combines mAP with the
five normalized true-positive error terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, FrameMismatchError, UnknownClassError
from .types import DETECTION_CLASSES, DetectionBox3D

# velocity and attribute errors are not defined for these classes
CLASSES_WITHOUT_VELOCITY = ("traffic_cone", "barrier")
CLASSES_WITHOUT_ATTRIBUTE = ("traffic_cone", "barrier")

DEFAULT_CLASS_RANGES = {
    "car": 50.0,
    "truck": 50.0,
    "bus": 50.0,
    "trailer": 50.0,
    "construction_vehicle": 50.0,
    "pedestrian": 40.0,
    "motorcycle": 40.0,
    "bicycle": 40.0,
    "traffic_cone": 30.0,
    "barrier": 30.0,
}

TP_METRIC_NAMES = ("ate", "ase", "aoe", "ave", "aae")

FrameBoxes = Mapping[str, Sequence[DetectionBox3D]]


@dataclass(frozen=True)
class DetEvalConfig:
    dist_thresholds: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    class_ranges: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_CLASS_RANGES))
    min_recall: float = 0.1
    min_precision: float = 0.1
    tp_threshold: float = 2.0
    tp_averaging: str = "simple"  # or "cumulative"

    def __post_init__(self) -> None:
        ths = tuple(float(t) for t in self.dist_thresholds)
        object.__setattr__(self, "dist_thresholds", ths)
        if any(t <= 0 for t in ths) or any(a >= b for a, b in zip(ths, ths[1:])):
            raise ValueError("dist_thresholds must be positive and strictly increasing")
        if any(r <= 0 for r in self.class_ranges.values()):
            raise ValueError("class ranges must be positive")
        if self.tp_averaging not in ("simple", "cumulative"):
            raise ValueError(f"unknown tp_averaging mode {self.tp_averaging!r}")

    def scaled_ranges(self, fraction: float) -> dict[str, float]:
        return {cls: rng * fraction for cls, rng in self.class_ranges.items()}


@dataclass(frozen=True)
class TPErrors:
    """Mean true-positive errors; NaN marks a metric undefined for the class."""

    ate: float
    ase: float
    aoe: float
    ave: float
    aae: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in TP_METRIC_NAMES}


@dataclass(frozen=True)
class DetEvalReport:
    per_class_ap: dict[tuple[str, float], float]
    per_class_tp: dict[str, TPErrors]
    map_score: float
    nds: float

    def to_json(self) -> dict:
        return {
            "per_class_ap": {
                f"{cls}@{th:g}": ap for (cls, th), ap in sorted(self.per_class_ap.items())
            },
            "per_class_tp": {
                cls: {k: (None if math.isnan(v) else v) for k, v in tp.as_dict().items()}
                for cls, tp in sorted(self.per_class_tp.items())
            },
            "map": self.map_score,
            "nds": self.nds,
        }

    def markdown_row(self, label: str, da: float | None = None, gap: float | None = None) -> str:
        """One table row in mAP / NDS / DA / gap(%) column order."""
        cells = [label, f"{100 * self.map_score:.1f}", f"{100 * self.nds:.1f}"]
        cells.append("-" if da is None else f"{da:.1f}")
        cells.append("-" if gap is None else f"{gap:.1f}")
        return "| " + " | ".join(cells) + " |"


def match_class(
    preds: Sequence[tuple[str, DetectionBox3D]],
    gts: Sequence[tuple[str, DetectionBox3D]],
    threshold: float,
) -> list[tuple[int, int | None, bool]]:
    """Greedy same-frame matching for one class at one distance threshold.

    Predictions are processed in strictly descending score order (ties broken
    by stable input order); each one takes the nearest unmatched ground-truth
    box in its frame if the BEV center distance is within ``threshold``.
    Returns ``(pred_index, gt_index_or_None, is_tp)`` in processing order.
    """
    gt_by_frame: dict[str, list[int]] = {}
    for j, (frame_id, _) in enumerate(gts):
        gt_by_frame.setdefault(frame_id, []).append(j)

    order = sorted(range(len(preds)), key=lambda i: -preds[i][1].score)
    taken: set[int] = set()
    results: list[tuple[int, int | None, bool]] = []
    for i in order:
        frame_id, pred = preds[i]
        best_j = None
        best_dist = math.inf
        for j in gt_by_frame.get(frame_id, ()):
            if j in taken:
                continue
            gt = gts[j][1]
            dist = math.hypot(pred.center[0] - gt.center[0], pred.center[1] - gt.center[1])
            if dist < best_dist:
                best_j, best_dist = j, dist
        if best_j is not None and best_dist <= threshold:
            taken.add(best_j)
            results.append((i, best_j, True))
        else:
            results.append((i, None, False))
    return results


def _interpolated_precision(tp_flags: Sequence[bool], n_gt: int) -> np.ndarray:
    """Monotone-max interpolated precision on the 101-point recall grid."""
    grid = np.arange(101) / 100.0  # exact j/100 values for stable comparisons
    if not tp_flags:
        return np.zeros_like(grid)
    tp = np.cumsum(np.asarray(tp_flags, dtype=float))
    ranks = np.arange(1, len(tp) + 1, dtype=float)
    precision = tp / ranks
    recall = tp / n_gt
    # suffix max: best precision achievable at or beyond each operating point
    suffix = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, grid, side="left")
    interp = np.zeros_like(grid)
    inside = idx < len(recall)
    interp[inside] = suffix[idx[inside]]
    return interp


def average_precision(
    matches: Sequence[tuple[int, int | None, bool]],
    n_gt: int,
    min_recall: float = 0.1,
    min_precision: float = 0.1,
) -> float | None:
    """nuScenes-style clipped AP; None when undefined (no ground truth)."""
    if n_gt == 0:
        return None
    grid = np.arange(101) / 100.0  # exact j/100 values for stable comparisons
    interp = _interpolated_precision([m[2] for m in matches], n_gt)
    keep = grid > min_recall
    clipped = np.maximum(interp[keep] - min_precision, 0.0)
    # the normalized integral is in [0, 1] exactly; clamp rounding spill
    return min(1.0, float(np.mean(clipped) / (1.0 - min_precision)))


def size_aligned_iou(size_a: tuple, size_b: tuple) -> float:
    """3D IoU of two boxes after aligning centers and yaw (pure size IoU)."""
    inter = math.prod(min(a, b) for a, b in zip(size_a, size_b))
    union = math.prod(size_a) + math.prod(size_b) - inter
    return inter / union


def yaw_difference(a: float, b: float, period: float = 2.0 * math.pi) -> float:
    """Smallest absolute angular difference under the given period."""
    diff = math.fmod(abs(a - b), period)
    return min(diff, period - diff)


def tp_error_metrics(
    matched_pairs: Sequence[tuple[DetectionBox3D, DetectionBox3D]],
    class_name: str | None = None,
) -> TPErrors:
    """Mean TP errors over (prediction, ground truth) pairs of one class.

    Empty input yields the all-1.0 worst-case sentinel.  Velocity and
    attribute errors are NaN for classes where they are undefined, and for
    pair sets where no pair carries the needed field.
    """
    if not matched_pairs:
        return TPErrors(1.0, 1.0, 1.0, 1.0, 1.0)
    if class_name is None:
        class_name = matched_pairs[0][1].class_name

    ate = float(
        np.mean(
            [
                math.hypot(p.center[0] - g.center[0], p.center[1] - g.center[1])
                for p, g in matched_pairs
            ]
        )
    )
    ase = float(np.mean([1.0 - size_aligned_iou(p.size, g.size) for p, g in matched_pairs]))
    period = math.pi if class_name == "barrier" else 2.0 * math.pi
    aoe = float(np.mean([yaw_difference(p.yaw, g.yaw, period) for p, g in matched_pairs]))

    ave = math.nan
    if class_name not in CLASSES_WITHOUT_VELOCITY:
        diffs = [
            math.hypot(p.velocity[0] - g.velocity[0], p.velocity[1] - g.velocity[1])
            for p, g in matched_pairs
            if p.velocity is not None and g.velocity is not None
        ]
        if diffs:
            ave = float(np.mean(diffs))

    aae = math.nan
    if class_name not in CLASSES_WITHOUT_ATTRIBUTE:
        flags = [
            float(p.attribute == g.attribute)
            for p, g in matched_pairs
            if g.attribute is not None
        ]
        if flags:
            aae = 1.0 - float(np.mean(flags))

    return TPErrors(ate, ase, aoe, ave, aae)


def nds(map_score: float, class_mean_tp_errors: Sequence[float]) -> float:
    """Weighted detection score: half mAP, half the five clamped TP terms.

    NDS = (5 * mAP + sum over the five metrics of max(1 - mTP, 0)) / 10.
    A NaN class-mean (metric undefined for every evaluated class) counts as
    zero error, keeping self-agreement at 1.
    """
    if not 0.0 <= map_score <= 1.0:
        raise DomainError(f"map_score {map_score} outside [0, 1]")
    if len(class_mean_tp_errors) != 5:
        raise DomainError("expected the five TP error means")
    total = 5.0 * map_score
    for err in class_mean_tp_errors:
        if math.isnan(err):
            err = 0.0
        total += max(1.0 - err, 0.0)
    return total / 10.0


def _cumulative_tp_means(
    ranked: Sequence[tuple[bool, TPErrors | None]],
    n_gt: int,
    min_recall: float,
) -> TPErrors:
    """nuScenes-style recall-averaged cumulative TP means (config knob)."""
    values: dict[str, float] = {}
    for name in TP_METRIC_NAMES:
        errs = []
        recalls = []
        n_tp = 0
        for is_tp, pair_err in ranked:
            if not is_tp:
                continue
            n_tp += 1
            err = getattr(pair_err, name)
            if math.isnan(err):
                continue
            errs.append(err)
            recalls.append(n_tp / n_gt)
        if not errs:
            values[name] = math.nan
            continue
        cum = np.cumsum(errs) / np.arange(1, len(errs) + 1)
        grid = np.arange(101) / 100.0  # exact j/100 values for stable comparisons
        usable = (grid > min_recall) & (grid <= recalls[-1])
        if not np.any(usable):
            values[name] = 1.0
            continue
        idx = np.searchsorted(recalls, grid[usable], side="left")
        values[name] = float(np.mean(cum[idx]))
    return TPErrors(**values)


def _pair_errors(pred: DetectionBox3D, gt: DetectionBox3D) -> TPErrors:
    return tp_error_metrics([(pred, gt)], class_name=gt.class_name)


def filter_by_range(frames: FrameBoxes, class_ranges: Mapping[str, float]) -> dict[str, list[DetectionBox3D]]:
    """Drop boxes beyond their class's maximum BEV evaluation range."""
    out: dict[str, list[DetectionBox3D]] = {}
    for frame_id, boxes in frames.items():
        kept = []
        for box in boxes:
            if box.class_name not in class_ranges:
                raise UnknownClassError(f"no evaluation range for class {box.class_name!r}")
            if box.bev_distance() <= class_ranges[box.class_name]:
                kept.append(box)
        out[frame_id] = kept
    return out


def _pool_by_class(frames: Mapping[str, list[DetectionBox3D]]) -> dict[str, list[tuple[str, DetectionBox3D]]]:
    pooled: dict[str, list[tuple[str, DetectionBox3D]]] = {}
    for frame_id in frames:
        for box in frames[frame_id]:
            pooled.setdefault(box.class_name, []).append((frame_id, box))
    return pooled


def evaluate_detections(
    preds: FrameBoxes,
    gts: FrameBoxes,
    config: DetEvalConfig | None = None,
) -> DetEvalReport:
    """Full detection evaluation of per-frame predictions against labels.

    Classes with no ground truth (after range filtering) are excluded from
    mAP and the TP means, whether or not they have predictions.  With no
    evaluable class at all the report degenerates to zeros.
    """
    config = config or DetEvalConfig()
    if not set(preds).issubset(set(gts)):
        extra = sorted(set(preds) - set(gts))
        raise FrameMismatchError(f"prediction frames not in ground truth: {extra}")
    for frames in (preds, gts):
        for boxes in frames.values():
            for box in boxes:
                if box.class_name not in DETECTION_CLASSES:
                    raise UnknownClassError(f"unknown detection class {box.class_name!r}")

    preds_f = _pool_by_class(filter_by_range(preds, config.class_ranges))
    gts_f = _pool_by_class(filter_by_range(gts, config.class_ranges))

    classes = sorted(cls for cls in gts_f if gts_f[cls])
    per_class_ap: dict[tuple[str, float], float] = {}
    per_class_tp: dict[str, TPErrors] = {}
    for cls in classes:
        cls_preds = preds_f.get(cls, [])
        cls_gts = gts_f[cls]
        for th in config.dist_thresholds:
            matches = match_class(cls_preds, cls_gts, th)
            ap = average_precision(matches, len(cls_gts), config.min_recall, config.min_precision)
            per_class_ap[(cls, th)] = ap

        tp_matches = match_class(cls_preds, cls_gts, config.tp_threshold)
        pairs = [(cls_preds[i][1], cls_gts[j][1]) for i, j, is_tp in tp_matches if is_tp]
        if config.tp_averaging == "simple":
            per_class_tp[cls] = tp_error_metrics(pairs, class_name=cls)
        else:
            if not pairs:
                per_class_tp[cls] = TPErrors(1.0, 1.0, 1.0, 1.0, 1.0)
            else:
                ranked = [
                    (is_tp, _pair_errors(cls_preds[i][1], cls_gts[j][1]) if is_tp else None)
                    for i, j, is_tp in tp_matches
                ]
                per_class_tp[cls] = _cumulative_tp_means(ranked, len(cls_gts), config.min_recall)

    if per_class_ap:
        map_score = float(
            np.mean([per_class_ap[(cls, th)] for cls in classes for th in config.dist_thresholds])
        )
    else:
        map_score = 0.0

    mean_errors = []
    for name in TP_METRIC_NAMES:
        values = [
            getattr(per_class_tp[cls], name)
            for cls in classes
            if not math.isnan(getattr(per_class_tp[cls], name))
        ]
        mean_errors.append(float(np.mean(values)) if values else math.nan)

    nds_value = nds(map_score, mean_errors) if classes else 0.0
    return DetEvalReport(per_class_ap, per_class_tp, map_score, nds_value)


def gap_percent(real_metric: float, sim_metric: float) -> float:
    """Relative performance drop, in percent, of sim against real (unclamped)."""
    if real_metric <= 0:
        raise DomainError(f"real metric must be positive, got {real_metric}")
    return 100.0 * (real_metric - sim_metric) / real_metric
