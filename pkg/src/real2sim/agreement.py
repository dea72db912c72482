"""Detection Agreement: symmetric consistency between two detection sets.

The score of direction A->B is the detection NDS of A's boxes evaluated at a
single 2 m distance threshold against B's boxes serving as pseudo ground
truth (scores dropped, velocities and attributes kept).  DA averages both
directions and scales to [0, 100], so it is symmetric by construction and
100 for identical sets.  The same swap applied to map mAP gives the mapping
agreement.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from .deteval import DetEvalConfig, FrameBoxes, evaluate_detections, filter_by_range
from .errors import FrameMismatchError
from .mapeval import FramePolylines, MapEvalConfig, crop_frames, evaluate_map

DEFAULT_RANGE_FRACTIONS = tuple(round(0.1 * i, 10) for i in range(1, 11))


@dataclass(frozen=True)
class AgreementConfig:
    da_threshold: float = 2.0
    pseudo_gt_score_min: float = 0.0
    range_fractions: tuple[float, ...] = DEFAULT_RANGE_FRACTIONS

    def __post_init__(self) -> None:
        fractions = tuple(float(f) for f in self.range_fractions)
        object.__setattr__(self, "range_fractions", fractions)
        if any(not 0.0 < f <= 1.0 for f in fractions):
            raise ValueError("range fractions must lie in (0, 1]")
        if any(a >= b for a, b in zip(fractions, fractions[1:])):
            raise ValueError("range fractions must be sorted ascending")


@dataclass(frozen=True)
class AgreementResult:
    da: float
    da_ab: float
    da_ba: float

    def to_json(self) -> dict:
        return {"da": self.da, "da_ab": self.da_ab, "da_ba": self.da_ba}


def _check_frames(a: Mapping, b: Mapping) -> None:
    if set(a) != set(b):
        only_a = sorted(set(a) - set(b))
        only_b = sorted(set(b) - set(a))
        raise FrameMismatchError(f"frame ids differ: only_a={only_a}, only_b={only_b}")


def _count(frames: Mapping) -> int:
    return sum(len(v) for v in frames.values())


def _pseudo_gt(frames: FrameBoxes, score_min: float) -> dict:
    return {
        fid: [replace(box, score=1.0) for box in boxes if box.score >= score_min]
        for fid, boxes in frames.items()
    }


def detection_agreement_detail(
    dets_a: FrameBoxes,
    dets_b: FrameBoxes,
    config: AgreementConfig | None = None,
    class_ranges: Mapping[str, float] | None = None,
) -> AgreementResult:
    """DA plus the two directional scores, all in [0, 100].

    Emptiness is judged after range filtering: two sets that agree inside the
    evaluated range agree, period.  Both sides empty scores 100, exactly one
    empty scores 0.
    """
    config = config or AgreementConfig()
    _check_frames(dets_a, dets_b)

    det_config = DetEvalConfig(
        dist_thresholds=(config.da_threshold,),
        tp_threshold=config.da_threshold,
        **({"class_ranges": dict(class_ranges)} if class_ranges is not None else {}),
    )
    a_in = filter_by_range(dets_a, det_config.class_ranges)
    b_in = filter_by_range(dets_b, det_config.class_ranges)
    na, nb = _count(a_in), _count(b_in)
    if na == 0 and nb == 0:
        return AgreementResult(100.0, 100.0, 100.0)
    if na == 0 or nb == 0:
        return AgreementResult(0.0, 0.0, 0.0)

    nds_ab = evaluate_detections(a_in, _pseudo_gt(b_in, config.pseudo_gt_score_min), det_config).nds
    nds_ba = evaluate_detections(b_in, _pseudo_gt(a_in, config.pseudo_gt_score_min), det_config).nds
    return AgreementResult(
        100.0 * 0.5 * (nds_ab + nds_ba), 100.0 * nds_ab, 100.0 * nds_ba
    )


def detection_agreement(
    dets_a: FrameBoxes,
    dets_b: FrameBoxes,
    config: AgreementConfig | None = None,
    class_ranges: Mapping[str, float] | None = None,
) -> float:
    return detection_agreement_detail(dets_a, dets_b, config, class_ranges).da


def map_agreement_detail(
    maps_a: FramePolylines,
    maps_b: FramePolylines,
    config: AgreementConfig | None = None,
    map_config: MapEvalConfig | None = None,
) -> AgreementResult:
    """Mapping agreement: the DA swap applied to map mAP."""
    config = config or AgreementConfig()
    map_config = map_config or MapEvalConfig()
    _check_frames(maps_a, maps_b)

    a_in = crop_frames(maps_a, map_config)
    b_in = crop_frames(maps_b, map_config)
    na, nb = _count(a_in), _count(b_in)
    if na == 0 and nb == 0:
        return AgreementResult(100.0, 100.0, 100.0)
    if na == 0 or nb == 0:
        return AgreementResult(0.0, 0.0, 0.0)

    def pseudo(frames):
        return {
            fid: [replace(line, score=1.0) for line in lines if line.score >= config.pseudo_gt_score_min]
            for fid, lines in frames.items()
        }

    map_ab = evaluate_map(a_in, pseudo(b_in), map_config).map_score
    map_ba = evaluate_map(b_in, pseudo(a_in), map_config).map_score
    return AgreementResult(
        100.0 * 0.5 * (map_ab + map_ba), 100.0 * map_ab, 100.0 * map_ba
    )


def map_agreement(
    maps_a: FramePolylines,
    maps_b: FramePolylines,
    config: AgreementConfig | None = None,
    map_config: MapEvalConfig | None = None,
) -> float:
    return map_agreement_detail(maps_a, maps_b, config, map_config).da


def agreement_range_curve(
    dets_a: FrameBoxes,
    dets_b: FrameBoxes,
    config: AgreementConfig | None = None,
) -> list[tuple[float, float]]:
    """DA recomputed with every class range scaled by each fraction.

    The entry at fraction 1.0 equals plain ``detection_agreement`` exactly.
    """
    config = config or AgreementConfig()
    base_ranges = DetEvalConfig().class_ranges
    curve = []
    for fraction in config.range_fractions:
        scaled = {cls: rng * fraction for cls, rng in base_ranges.items()}
        curve.append((fraction, detection_agreement(dets_a, dets_b, config, scaled)))
    return curve
