"""Scene manifest ingestion and canonical serialization.

One UTF-8 JSON document per scene.  Field names match the domain type field
names; angles are radians everywhere in files except the ``rotated`` variant
tag, which records degrees.  ``save_manifest`` emits a canonical form
(sorted keys, compact separators, shortest round-trip floats) so that
save -> load -> save is byte-stable.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import ParseError, ValidationError
from .types import (
    DetectionBox3D,
    FrameRecord,
    MapPolyline,
    Pose,
    SceneManifest,
    Variant,
)

DEFAULT_MAX_BOXES_PER_FRAME = 500


def _no_duplicate_keys(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ParseError(f"duplicate key {key!r} in JSON object")
        out[key] = value
    return out


def _variant_from_json(value) -> Variant:
    if isinstance(value, str):
        if value in ("real", "sim"):
            return Variant(value)
        raise ParseError(f"string variant must be 'real' or 'sim', got {value!r}")
    if isinstance(value, dict):
        kind = value.get("kind")
        if kind == "shifted":
            return Variant.shifted(value["offset_m"])
        if kind == "rotated":
            return Variant.rotated(value["angle_deg"])
        raise ParseError(f"object variant must have kind 'shifted' or 'rotated', got {kind!r}")
    raise ParseError(f"variant must be a string or object, got {type(value).__name__}")


def _variant_to_json(variant: Variant):
    if variant.kind == "shifted":
        return {"kind": "shifted", "offset_m": variant.offset_m}
    if variant.kind == "rotated":
        return {"kind": "rotated", "angle_deg": variant.angle_deg}
    return variant.kind


def _box_from_json(obj: dict) -> DetectionBox3D:
    return DetectionBox3D(
        class_name=obj["class_name"],
        center=obj["center"],
        size=obj["size"],
        yaw=obj["yaw"],
        velocity=obj.get("velocity"),
        score=obj.get("score", 1.0),
        attribute=obj.get("attribute"),
    )


def _box_to_json(box: DetectionBox3D) -> dict:
    return {
        "class_name": box.class_name,
        "center": list(box.center),
        "size": list(box.size),
        "yaw": box.yaw,
        "velocity": list(box.velocity) if box.velocity is not None else None,
        "score": box.score,
        "attribute": box.attribute,
    }


def _polyline_from_json(obj: dict) -> MapPolyline:
    return MapPolyline(
        class_name=obj["class_name"],
        points=tuple(tuple(p) for p in obj["points"]),
        score=obj.get("score", 1.0),
    )


def _polyline_to_json(line: MapPolyline) -> dict:
    return {
        "class_name": line.class_name,
        "points": [list(p) for p in line.points],
        "score": line.score,
    }


def _frame_from_json(obj: dict, scene_id: str, max_boxes: int) -> FrameRecord:
    frame_id = obj["frame_id"]
    where = f"scene {scene_id!r}, frame {frame_id!r}"
    pose_obj = obj["ego_pose"]
    try:
        pose = Pose(tuple(pose_obj["translation"]), tuple(pose_obj["rotation"]))
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from exc

    boxes = []
    raw_boxes = obj.get("boxes") or []
    if len(raw_boxes) > max_boxes:
        raise ValidationError(f"{where}: {len(raw_boxes)} boxes exceed the cap of {max_boxes}")
    for i, raw in enumerate(raw_boxes):
        try:
            boxes.append(_box_from_json(raw))
        except ValidationError as exc:
            raise ValidationError(f"{where}: box {i}: {exc}") from exc

    polylines = []
    for i, raw in enumerate(obj.get("polylines") or []):
        try:
            polylines.append(_polyline_from_json(raw))
        except ValidationError as exc:
            raise ValidationError(f"{where}: polyline {i}: {exc}") from exc

    return FrameRecord(
        frame_id=frame_id,
        timestamp=obj["timestamp"],
        ego_pose=pose,
        images=obj.get("images") or {},
        boxes=tuple(boxes),
        polylines=tuple(polylines),
    )


def _frame_to_json(frame: FrameRecord) -> dict:
    return {
        "frame_id": frame.frame_id,
        "timestamp": frame.timestamp,
        "ego_pose": {
            "translation": list(frame.ego_pose.translation),
            "rotation": list(frame.ego_pose.rotation),
        },
        "images": dict(frame.images),
        "boxes": [_box_to_json(b) for b in frame.boxes],
        "polylines": [_polyline_to_json(p) for p in frame.polylines],
    }


def manifest_from_json(obj: dict, max_boxes_per_frame: int = DEFAULT_MAX_BOXES_PER_FRAME) -> SceneManifest:
    try:
        scene_id = obj["scene_id"]
        variant = _variant_from_json(obj["variant"])
        frames = tuple(
            _frame_from_json(f, scene_id, max_boxes_per_frame) for f in obj.get("frames") or []
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"manifest does not match the scene schema: {exc!r}") from exc
    return SceneManifest(scene_id=scene_id, variant=variant, frames=frames)


def manifest_to_json(manifest: SceneManifest) -> dict:
    return {
        "scene_id": manifest.scene_id,
        "variant": _variant_to_json(manifest.variant),
        "frames": [_frame_to_json(f) for f in manifest.frames],
    }


def load_manifest(path, max_boxes_per_frame: int = DEFAULT_MAX_BOXES_PER_FRAME) -> SceneManifest:
    """Load and validate one scene manifest from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: manifest root must be a JSON object")
    return manifest_from_json(obj, max_boxes_per_frame)


def dumps_manifest(manifest: SceneManifest) -> str:
    """Canonical JSON text for a manifest (stable bytes for equal content)."""
    return json.dumps(
        manifest_to_json(manifest),
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
        allow_nan=False,
    ) + "\n"


def save_manifest(manifest: SceneManifest, path) -> None:
    Path(path).write_text(dumps_manifest(manifest), encoding="utf-8")
