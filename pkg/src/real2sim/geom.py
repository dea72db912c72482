"""Ego-pose perturbations and the matching label/detection transforms.

A perturbation moves the ego vehicle (lateral shift along +y = left, or
rotation about the ego origin's z-axis); annotations expressed in the ego
frame then transform by the inverse rigid motion.  Sizes are never touched,
yaw stays normalized, velocities co-rotate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .types import (
    DetectionBox3D,
    FrameRecord,
    MapPolyline,
    Pose,
    SceneManifest,
    Variant,
    normalize_angle,
)

LATERAL_SOFT_LIMIT_M = 3.0


@dataclass(frozen=True)
class EgoPerturbation:
    kind: str  # "lateral" | "rotation"
    value: float  # meters for lateral, degrees for rotation

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", float(self.value))
        if self.kind == "lateral":
            if abs(self.value) > LATERAL_SOFT_LIMIT_M:
                warnings.warn(
                    f"lateral offset {self.value} m outside the usual +-{LATERAL_SOFT_LIMIT_M} m",
                    stacklevel=3,
                )
        elif self.kind == "rotation":
            deg = self.value % 360.0
            if deg > 180.0:
                deg -= 360.0
            if deg == -180.0:
                deg = 180.0
            object.__setattr__(self, "value", deg)
        else:
            raise ValidationError(f"unknown perturbation kind {self.kind!r}")

    @classmethod
    def lateral(cls, offset_m: float) -> "EgoPerturbation":
        return cls("lateral", offset_m)

    @classmethod
    def rotation(cls, angle_deg: float) -> "EgoPerturbation":
        return cls("rotation", angle_deg)

    def inverse(self) -> "EgoPerturbation":
        if self.kind == "lateral":
            return EgoPerturbation("lateral", -self.value)
        return EgoPerturbation("rotation", -self.value)

    def variant(self) -> Variant:
        if self.kind == "lateral":
            return Variant.shifted(self.value)
        return Variant.rotated(self.value)

    @classmethod
    def parse(cls, text: str) -> "EgoPerturbation":
        """Parse CLI syntax ``lateral:+2.0`` or ``rot:-30``."""
        try:
            kind, raw = text.split(":", 1)
            value = float(raw)
        except ValueError as exc:
            raise ValidationError(f"cannot parse perturbation {text!r}") from exc
        if kind in ("lateral", "shift"):
            return cls.lateral(value)
        if kind in ("rot", "rotation"):
            return cls.rotation(value)
        raise ValidationError(f"unknown perturbation kind {kind!r} in {text!r}")


def perturb_pose(pose: Pose, pert: EgoPerturbation) -> Pose:
    """Ego-to-global pose of the perturbed ego."""
    if pert.kind == "lateral":
        return pose.compose(Pose((0.0, pert.value, 0.0), (1.0, 0.0, 0.0, 0.0)))
    return pose.compose(Pose.from_rotation_z(math.radians(pert.value)))


def _rotate_xy(x: float, y: float, angle: float) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return c * x - s * y, s * x + c * y


def transform_boxes(
    boxes: Iterable[DetectionBox3D], pert: EgoPerturbation
) -> list[DetectionBox3D]:
    """Re-express ego-frame boxes in the perturbed ego frame."""
    out = []
    if pert.kind == "lateral":
        d = pert.value
        for box in boxes:
            cx, cy, cz = box.center
            out.append(replace(box, center=(cx, cy - d, cz)))
        return out

    angle = math.radians(pert.value)
    for box in boxes:
        cx, cy, cz = box.center
        nx, ny = _rotate_xy(cx, cy, -angle)
        velocity = box.velocity
        if velocity is not None:
            velocity = _rotate_xy(velocity[0], velocity[1], -angle)
        out.append(
            replace(
                box,
                center=(nx, ny, cz),
                yaw=normalize_angle(box.yaw - angle),
                velocity=velocity,
            )
        )
    return out


def transform_polylines(
    lines: Iterable[MapPolyline], pert: EgoPerturbation
) -> list[MapPolyline]:
    """Re-express ego-frame polylines in the perturbed ego frame."""
    out = []
    if pert.kind == "lateral":
        d = pert.value
        for line in lines:
            pts = tuple((x, y - d) for x, y in line.points)
            out.append(replace(line, points=pts))
        return out

    angle = math.radians(pert.value)
    for line in lines:
        pts = tuple(_rotate_xy(x, y, -angle) for x, y in line.points)
        out.append(replace(line, points=pts))
    return out


def _footprint_corners(cx: float, cy: float, width: float, length: float, yaw: float) -> np.ndarray:
    # length runs along the heading axis
    local = np.array(
        [
            [length / 2, width / 2],
            [length / 2, -width / 2],
            [-length / 2, -width / 2],
            [-length / 2, width / 2],
        ]
    )
    c, s = math.cos(yaw), math.sin(yaw)
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([cx, cy])


def _rects_overlap(a: np.ndarray, b: np.ndarray) -> bool:
    """Separating-axis test for two convex quads given as corner arrays."""
    for rect in (a, b):
        edges = np.roll(rect, -1, axis=0) - rect
        for edge in edges[:2]:
            axis = np.array([-edge[1], edge[0]])
            pa = a @ axis
            pb = b @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def check_feasibility(
    boxes: Sequence[DetectionBox3D],
    pert: EgoPerturbation,
    ego_width: float = 1.9,
    ego_length: float = 4.6,
) -> list[str]:
    """Warn when the perturbed ego footprint would overlap another actor.

    Returns one message per offending box; the caller decides whether to
    surface them.  This mirrors a manual plausibility check, so overlap is a
    warning, never an error.
    """
    if pert.kind == "lateral":
        ego = _footprint_corners(0.0, pert.value, ego_width, ego_length, 0.0)
    else:
        ego = _footprint_corners(0.0, 0.0, ego_width, ego_length, math.radians(pert.value))
    messages = []
    for box in boxes:
        corners = _footprint_corners(
            box.center[0], box.center[1], box.size[0], box.size[1], box.yaw
        )
        if _rects_overlap(ego, corners):
            messages.append(
                f"perturbed ego footprint overlaps {box.class_name} at "
                f"({box.center[0]:.2f}, {box.center[1]:.2f})"
            )
    return messages


def transform_manifest(manifest: SceneManifest, pert: EgoPerturbation) -> tuple[SceneManifest, list[str]]:
    """Perturb every frame of a scene; returns the manifest plus warnings."""
    frames = []
    warnings_out = []
    for frame in manifest.frames:
        for message in check_feasibility(frame.boxes, pert):
            warnings_out.append(f"frame {frame.frame_id!r}: {message}")
        frames.append(
            FrameRecord(
                frame_id=frame.frame_id,
                timestamp=frame.timestamp,
                ego_pose=perturb_pose(frame.ego_pose, pert),
                images=dict(frame.images),
                boxes=tuple(transform_boxes(frame.boxes, pert)),
                polylines=tuple(transform_polylines(frame.polylines, pert)),
            )
        )
    out = SceneManifest(scene_id=manifest.scene_id, variant=pert.variant(), frames=tuple(frames))
    return out, warnings_out
