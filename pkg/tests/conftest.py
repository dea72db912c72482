from __future__ import annotations

import math

import numpy as np
import pytest

from real2sim.types import (
    DETECTION_CLASSES,
    MAP_CLASSES,
    DetectionBox3D,
    FrameRecord,
    MapPolyline,
    Pose,
    SceneManifest,
    Variant,
)

ATTRIBUTES = ("vehicle.moving", "vehicle.parked", "pedestrian.moving", None)


def random_box(rng: np.random.Generator, class_name: str | None = None, max_range: float = 45.0) -> DetectionBox3D:
    cls = class_name or str(rng.choice(DETECTION_CLASSES))
    radius = rng.uniform(1.0, max_range)
    angle = rng.uniform(-math.pi, math.pi)
    velocity = None if rng.random() < 0.2 else tuple(rng.uniform(-5, 5, size=2))
    return DetectionBox3D(
        class_name=cls,
        center=(radius * math.cos(angle), radius * math.sin(angle), rng.uniform(-1, 2)),
        size=tuple(rng.uniform(0.3, 5.0, size=3)),
        yaw=rng.uniform(-math.pi, math.pi),
        velocity=velocity,
        score=float(rng.uniform(0.01, 1.0)),
        attribute=ATTRIBUTES[rng.integers(len(ATTRIBUTES))],
    )


def random_frame_boxes(
    rng: np.random.Generator,
    n_frames: int = 3,
    max_per_frame: int = 6,
    classes=None,
    max_range: float = 45.0,
) -> dict[str, list[DetectionBox3D]]:
    frames = {}
    for i in range(n_frames):
        count = int(rng.integers(0, max_per_frame + 1))
        cls = None if classes is None else str(rng.choice(classes))
        frames[f"frame{i}"] = [
            random_box(rng, class_name=cls if classes is not None else None, max_range=max_range)
            for _ in range(count)
        ]
    return frames


def jitter_boxes(rng: np.random.Generator, frames, sigma: float = 0.7):
    """A perturbed copy: moved centers, new scores, occasional drops."""
    import dataclasses

    out = {}
    for frame_id, boxes in frames.items():
        kept = []
        for box in boxes:
            if rng.random() < 0.15:
                continue
            dx, dy = rng.normal(0.0, sigma, size=2)
            kept.append(
                dataclasses.replace(
                    box,
                    center=(box.center[0] + dx, box.center[1] + dy, box.center[2]),
                    score=float(rng.uniform(0.01, 1.0)),
                )
            )
        out[frame_id] = kept
    return out


def random_polyline(rng: np.random.Generator, class_name: str | None = None) -> MapPolyline:
    cls = class_name or str(rng.choice(MAP_CLASSES))
    n = int(rng.integers(2, 7))
    start = rng.uniform(-12, 12, size=2)
    pts = [tuple(start)]
    for _ in range(n - 1):
        step = rng.uniform(-4, 4, size=2)
        while abs(step[0]) + abs(step[1]) < 1e-6:
            step = rng.uniform(-4, 4, size=2)
        start = start + step
        pts.append(tuple(start))
    return MapPolyline(cls, tuple(pts), float(rng.uniform(0.05, 1.0)))


def random_frame_polylines(rng: np.random.Generator, n_frames: int = 2, max_per_frame: int = 4):
    return {
        f"frame{i}": [random_polyline(rng) for _ in range(int(rng.integers(0, max_per_frame + 1)))]
        for i in range(n_frames)
    }


def random_pose(rng: np.random.Generator) -> Pose:
    quat = rng.normal(size=4)
    quat /= np.linalg.norm(quat)
    return Pose(tuple(rng.uniform(-100, 100, size=3)), tuple(quat))


def random_manifest(rng: np.random.Generator, scene_id: str = "scene-0001") -> SceneManifest:
    frames = []
    timestamp = int(rng.integers(0, 10**12))
    for i in range(int(rng.integers(1, 5))):
        timestamp += int(rng.integers(0, 500000))
        frames.append(
            FrameRecord(
                frame_id=f"frame{i}",
                timestamp=timestamp,
                ego_pose=random_pose(rng),
                images={f"cam{j}": f"images/cam{j}/frame{i}.jpg" for j in range(int(rng.integers(0, 3)))},
                boxes=tuple(random_box(rng) for _ in range(int(rng.integers(0, 4)))),
                polylines=tuple(random_polyline(rng) for _ in range(int(rng.integers(0, 3)))),
            )
        )
    variants = [Variant.real(), Variant.sim(), Variant.shifted(2.0), Variant.rotated(-30.0)]
    return SceneManifest(scene_id=scene_id, variant=variants[int(rng.integers(4))], frames=tuple(frames))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
