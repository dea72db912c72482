"""Domain types shared by every evaluation module.

Conventions, fixed once for the whole package:

* ego frame: x forward, y left, z up; all box and polyline coordinates in
  manifests are ego-frame,
* yaw is stored normalized to (-pi, pi], normalization happens at
  construction time,
* quaternions are (w, x, y, z) and must be unit within 1e-9.

All types are immutable after construction and safe to share across
parallel workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .errors import ValidationError

DETECTION_CLASSES = (
    "car",
    "truck",
    "bus",
    "trailer",
    "construction_vehicle",
    "pedestrian",
    "motorcycle",
    "bicycle",
    "traffic_cone",
    "barrier",
)

MAP_CLASSES = ("divider", "boundary", "crossing")

_TWO_PI = 2.0 * math.pi


def normalize_angle(angle: float) -> float:
    """Wrap an angle in radians into (-pi, pi]."""
    wrapped = (angle + math.pi) % _TWO_PI - math.pi
    if wrapped == -math.pi:
        wrapped = math.pi
    return wrapped


def _quat_multiply(a: tuple, b: tuple) -> tuple:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


@dataclass(frozen=True, eq=False)
class Pose:
    """Rigid transform: rotation (unit quaternion, w-first) then translation."""

    translation: tuple[float, float, float]
    rotation: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "translation", tuple(float(v) for v in self.translation))
        object.__setattr__(self, "rotation", tuple(float(v) for v in self.rotation))
        if len(self.translation) != 3:
            raise ValidationError("pose translation must have 3 components")
        if len(self.rotation) != 4:
            raise ValidationError("pose rotation must be a (w, x, y, z) quaternion")
        norm = math.sqrt(sum(v * v for v in self.rotation))
        if abs(norm - 1.0) > 1e-9:
            raise ValidationError(f"quaternion norm {norm!r} is not unit within 1e-9")

    @classmethod
    def identity(cls) -> "Pose":
        return cls((0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0))

    @classmethod
    def from_rotation_z(cls, angle: float, translation=(0.0, 0.0, 0.0)) -> "Pose":
        half = 0.5 * angle
        return cls(tuple(translation), (math.cos(half), 0.0, 0.0, math.sin(half)))

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.rotation
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    def apply(self, point) -> tuple[float, float, float]:
        rotated = self.rotation_matrix() @ np.asarray(point, dtype=float)
        return tuple(float(v) for v in rotated + np.asarray(self.translation))

    def compose(self, other: "Pose") -> "Pose":
        """self applied after `other` in this pose's frame: T = self * other."""
        rotation = _quat_multiply(self.rotation, other.rotation)
        norm = math.sqrt(sum(v * v for v in rotation))
        rotation = tuple(v / norm for v in rotation)
        return Pose(self.apply(other.translation), rotation)

    def inverse(self) -> "Pose":
        w, x, y, z = self.rotation
        conj = (w, -x, -y, -z)
        inv_t = -(Pose((0.0, 0.0, 0.0), conj).rotation_matrix() @ np.asarray(self.translation))
        return Pose(tuple(float(v) for v in inv_t), conj)

    def yaw(self) -> float:
        w, x, y, z = self.rotation
        return math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))

    def is_close(self, other: "Pose", tol: float = 1e-9) -> bool:
        dt = max(abs(a - b) for a, b in zip(self.translation, other.translation))
        # q and -q encode the same rotation
        dq = min(
            max(abs(a - b) for a, b in zip(self.rotation, other.rotation)),
            max(abs(a + b) for a, b in zip(self.rotation, other.rotation)),
        )
        return dt <= tol and dq <= tol


@dataclass(frozen=True, eq=False)
class DetectionBox3D:
    """One 3D object hypothesis or label in the ego frame.

    Labels carry score 1.0.  ``velocity`` may be None when the producer did
    not estimate it; ``attribute`` is an optional dataset token.
    """

    class_name: str
    center: tuple[float, float, float]
    size: tuple[float, float, float]
    yaw: float
    velocity: tuple[float, float] | None = None
    score: float = 1.0
    attribute: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "size", tuple(float(v) for v in self.size))
        object.__setattr__(self, "yaw", normalize_angle(float(self.yaw)))
        if self.velocity is not None:
            object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))
        object.__setattr__(self, "score", float(self.score))
        if len(self.center) != 3 or len(self.size) != 3:
            raise ValidationError("box center and size must have 3 components")
        if self.velocity is not None and len(self.velocity) != 2:
            raise ValidationError("box velocity must be a 2-vector")
        if any(not (v > 0.0) for v in self.size):
            raise ValidationError(f"box size {self.size} has a nonpositive component")
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"box score {self.score} outside [0, 1]")
        if self.class_name not in DETECTION_CLASSES:
            raise ValidationError(f"unknown detection class {self.class_name!r}")

    def bev_distance(self) -> float:
        return math.hypot(self.center[0], self.center[1])


@dataclass(frozen=True, eq=False)
class MapPolyline:
    """One vectorized map element as an ordered 2-D point sequence (ego BEV)."""

    class_name: str
    points: tuple[tuple[float, float], ...]
    score: float = 1.0

    def __post_init__(self) -> None:
        pts = tuple((float(p[0]), float(p[1])) for p in self.points)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "score", float(self.score))
        if self.class_name not in MAP_CLASSES:
            raise ValidationError(f"unknown map class {self.class_name!r}")
        if len(pts) < 2:
            raise ValidationError("polyline needs at least 2 points")
        for i in range(len(pts) - 1):
            if pts[i] == pts[i + 1]:
                raise ValidationError(f"polyline has identical consecutive points at index {i}")
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"polyline score {self.score} outside [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)


@dataclass(frozen=True)
class Variant:
    """Data variant tag: real, sim, or a perturbed rendering.

    ``offset_m`` is set only for kind ``shifted``; ``angle_deg`` (degrees, the
    one place the file format uses degrees) only for kind ``rotated``.
    """

    kind: str
    offset_m: float | None = None
    angle_deg: float | None = None

    _KINDS = ("real", "sim", "shifted", "rotated")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValidationError(f"unknown variant kind {self.kind!r}")
        if self.kind == "shifted" and self.offset_m is None:
            raise ValidationError("shifted variant needs offset_m")
        if self.kind == "rotated" and self.angle_deg is None:
            raise ValidationError("rotated variant needs angle_deg")
        if self.kind in ("real", "sim") and (self.offset_m is not None or self.angle_deg is not None):
            raise ValidationError(f"variant {self.kind!r} takes no parameter")

    @classmethod
    def real(cls) -> "Variant":
        return cls("real")

    @classmethod
    def sim(cls) -> "Variant":
        return cls("sim")

    @classmethod
    def shifted(cls, offset_m: float) -> "Variant":
        return cls("shifted", offset_m=float(offset_m))

    @classmethod
    def rotated(cls, angle_deg: float) -> "Variant":
        return cls("rotated", angle_deg=float(angle_deg))


@dataclass(frozen=True, eq=False)
class FrameRecord:
    """One annotated or predicted frame of a scene."""

    frame_id: str
    timestamp: int
    ego_pose: Pose
    images: dict[str, str] = field(default_factory=dict)
    boxes: tuple[DetectionBox3D, ...] = ()
    polylines: tuple[MapPolyline, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "timestamp", int(self.timestamp))
        object.__setattr__(self, "images", MappingProxyType(dict(self.images)))
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "polylines", tuple(self.polylines))


@dataclass(frozen=True, eq=False)
class SceneManifest:
    """A scene: ordered frames plus the variant tag of the underlying data."""

    scene_id: str
    variant: Variant
    frames: tuple[FrameRecord, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        seen: set[str] = set()
        last_ts = None
        for frame in self.frames:
            if frame.frame_id in seen:
                raise ValidationError(
                    f"scene {self.scene_id!r}: duplicate frame_id {frame.frame_id!r}"
                )
            seen.add(frame.frame_id)
            if last_ts is not None and frame.timestamp < last_ts:
                raise ValidationError(
                    f"scene {self.scene_id!r}: frame {frame.frame_id!r} breaks timestamp order"
                )
            last_ts = frame.timestamp

    def boxes_by_frame(self) -> dict[str, list[DetectionBox3D]]:
        return {f.frame_id: list(f.boxes) for f in self.frames}

    def polylines_by_frame(self) -> dict[str, list[MapPolyline]]:
        return {f.frame_id: list(f.polylines) for f in self.frames}


class FeatureSet:
    """N x D matrix of per-image deep features plus the row-to-image mapping."""

    __slots__ = ("features", "ids")

    def __init__(self, features: np.ndarray, ids) -> None:
        feats = np.ascontiguousarray(features, dtype=np.float32)
        if feats.ndim != 2:
            raise ValidationError(f"features must be 2-D, got shape {feats.shape}")
        ids = tuple(str(i) for i in ids)
        if feats.shape[0] != len(ids):
            raise ValidationError(
                f"feature rows ({feats.shape[0]}) != id count ({len(ids)})"
            )
        if feats.size and not np.all(np.isfinite(feats)):
            raise ValidationError("features contain non-finite values")
        feats.flags.writeable = False
        self.features = feats
        self.ids = ids

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __repr__(self) -> str:
        return f"FeatureSet(n={self.n}, dim={self.dim})"
