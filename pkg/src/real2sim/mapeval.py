"""Online-mapping evaluation for vectorized map elements.

Elements are resampled to a fixed point count by arc length, cropped to the
ego BEV evaluation box, and matched per class with score-descending greedy
matching on symmetric Chamfer distance.  AP uses the plain 101-point
interpolated integral (no recall/precision clipping, unlike the detection
protocol), and mAP averages the three map classes over the three Chamfer
thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .deteval import _interpolated_precision
from .errors import DegenerateError, FrameMismatchError, UnknownClassError
from .types import MAP_CLASSES, MapPolyline

FramePolylines = Mapping[str, Sequence[MapPolyline]]


@dataclass(frozen=True)
class MapEvalConfig:
    chamfer_thresholds: tuple[float, ...] = (0.5, 1.0, 1.5)
    resample_points: int = 100
    bev_range: tuple[float, float] = (15.0, 30.0)  # (x_half, y_half), meters

    def __post_init__(self) -> None:
        ths = tuple(float(t) for t in self.chamfer_thresholds)
        object.__setattr__(self, "chamfer_thresholds", ths)
        if any(a >= b for a, b in zip(ths, ths[1:])):
            raise ValueError("chamfer_thresholds must be strictly increasing")
        if self.resample_points < 2:
            raise ValueError("resample_points must be >= 2")


@dataclass(frozen=True)
class MapEvalReport:
    per_class_ap: dict[tuple[str, float], float]
    map_score: float

    def to_json(self) -> dict:
        return {
            "per_class_ap": {
                f"{cls}@{th:g}": ap for (cls, th), ap in sorted(self.per_class_ap.items())
            },
            "map": self.map_score,
        }

    def markdown_row(self, label: str, da: float | None = None, gap: float | None = None) -> str:
        cells = [label, f"{100 * self.map_score:.1f}"]
        cells.append("-" if da is None else f"{da:.1f}")
        cells.append("-" if gap is None else f"{gap:.1f}")
        return "| " + " | ".join(cells) + " |"


def resample_array(points: np.ndarray, n: int) -> np.ndarray:
    """Resample a (m, 2) point sequence to n points evenly spaced by arc length."""
    points = np.asarray(points, dtype=float)
    seg_lengths = np.hypot(*(points[1:] - points[:-1]).T)
    total = float(seg_lengths.sum())
    if total <= 0.0:
        raise DegenerateError("polyline has zero arc length")
    cum = np.concatenate([[0.0], np.cumsum(seg_lengths)])
    targets = np.linspace(0.0, total, n)
    out = np.column_stack(
        [np.interp(targets, cum, points[:, 0]), np.interp(targets, cum, points[:, 1])]
    )
    out[0] = points[0]
    out[-1] = points[-1]
    return out


def resample_polyline(line: MapPolyline, n: int) -> MapPolyline:
    """Arc-length resampling preserving the exact endpoints."""
    if n < 2:
        raise DegenerateError("resampling needs at least 2 points")
    pts = resample_array(line.as_array(), n)
    return MapPolyline(line.class_name, tuple(map(tuple, pts)), line.score)


def chamfer_distance(a: MapPolyline | np.ndarray, b: MapPolyline | np.ndarray) -> float:
    """Symmetric mean nearest-point distance between two resampled polylines."""
    pa = a.as_array() if isinstance(a, MapPolyline) else np.asarray(a, dtype=float)
    pb = b.as_array() if isinstance(b, MapPolyline) else np.asarray(b, dtype=float)
    dists = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2))
    return 0.5 * (float(dists.min(axis=1).mean()) + float(dists.min(axis=0).mean()))


def _inside_bev(points: np.ndarray, x_half: float, y_half: float) -> bool:
    return bool(
        np.any((np.abs(points[:, 0]) <= x_half) & (np.abs(points[:, 1]) <= y_half))
    )


def crop_frames(frames: FramePolylines, config: MapEvalConfig | None = None) -> dict[str, list[MapPolyline]]:
    """Keep elements with at least one resampled point inside the BEV box."""
    config = config or MapEvalConfig()
    x_half, y_half = config.bev_range
    out: dict[str, list[MapPolyline]] = {}
    for frame_id, lines in frames.items():
        kept = []
        for line in lines:
            if line.class_name not in MAP_CLASSES:
                raise UnknownClassError(f"unknown map class {line.class_name!r}")
            pts = resample_array(line.as_array(), config.resample_points)
            if _inside_bev(pts, x_half, y_half):
                kept.append(line)
        out[frame_id] = kept
    return out


def _pool(frames: Mapping[str, list[MapPolyline]], n_points: int):
    pooled: dict[str, list[tuple[str, float, np.ndarray]]] = {}
    for frame_id in frames:
        for line in frames[frame_id]:
            pts = resample_array(line.as_array(), n_points)
            pooled.setdefault(line.class_name, []).append((frame_id, line.score, pts))
    return pooled


def _greedy_chamfer_match(
    preds: list[tuple[str, float, np.ndarray]],
    gts: list[tuple[str, float, np.ndarray]],
    threshold: float,
) -> list[bool]:
    """Score-descending nearest-first matching; TP when Chamfer < threshold."""
    gt_by_frame: dict[str, list[int]] = {}
    for j, (frame_id, _, _) in enumerate(gts):
        gt_by_frame.setdefault(frame_id, []).append(j)
    order = sorted(range(len(preds)), key=lambda i: -preds[i][1])
    taken: set[int] = set()
    flags = []
    for i in order:
        frame_id, _, pts = preds[i]
        best_j = None
        best_cd = math.inf
        for j in gt_by_frame.get(frame_id, ()):
            if j in taken:
                continue
            cd = chamfer_distance(pts, gts[j][2])
            if cd < best_cd:
                best_j, best_cd = j, cd
        if best_j is not None and best_cd < threshold:
            taken.add(best_j)
            flags.append(True)
        else:
            flags.append(False)
    return flags


def evaluate_map(
    preds: FramePolylines,
    gts: FramePolylines,
    config: MapEvalConfig | None = None,
) -> MapEvalReport:
    """Map mAP of per-frame predicted elements against labels.

    Classes with no ground truth inside the crop are excluded from the mean;
    with no evaluable class at all the report degenerates to zero.
    """
    config = config or MapEvalConfig()
    if not set(preds).issubset(set(gts)):
        extra = sorted(set(preds) - set(gts))
        raise FrameMismatchError(f"prediction frames not in ground truth: {extra}")

    preds_pool = _pool(crop_frames(preds, config), config.resample_points)
    gts_pool = _pool(crop_frames(gts, config), config.resample_points)

    classes = [cls for cls in MAP_CLASSES if gts_pool.get(cls)]
    per_class_ap: dict[tuple[str, float], float] = {}
    for cls in classes:
        cls_preds = preds_pool.get(cls, [])
        cls_gts = gts_pool[cls]
        for th in config.chamfer_thresholds:
            flags = _greedy_chamfer_match(cls_preds, cls_gts, th)
            interp = _interpolated_precision(flags, len(cls_gts))
            per_class_ap[(cls, th)] = float(np.mean(interp))

    if per_class_ap:
        map_score = float(
            np.mean([per_class_ap[(cls, th)] for cls in classes for th in config.chamfer_thresholds])
        )
    else:
        map_score = 0.0
    return MapEvalReport(per_class_ap, map_score)
