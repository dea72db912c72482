"""Acceptance suite: one test per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
pass/fail lines as they execute.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np
import pytest

import oracles
from conftest import random_box, random_frame_boxes, random_polyline
from real2sim.agreement import AgreementConfig, agreement_range_curve, detection_agreement
from real2sim.analysis import correlate_metric, pearson
from real2sim.augment import AugmentConfig, augment_image, identity_config, plan_mixing
from real2sim.deteval import evaluate_detections, gap_percent
from real2sim.geom import EgoPerturbation, transform_boxes, transform_polylines
from real2sim.imgmetrics import frechet_distance, psnr, ssim
from real2sim.svgplot import scatter_svg


@contextmanager
def criterion(number: int, text: str):
    try:
        yield
    except Exception:
        print(f"[FAIL] criterion {number}: {text}")
        raise
    print(f"[PASS] criterion {number}: {text}")


# (baseline real, printed sim, printed gap) per model x fine-tuning, Table 1 mAP
GAP_CASES = [
    # FCOS3D, baseline real mAP 32.2
    (32.2, 13.5, 58.1), (32.2, 13.5, 58.1), (32.2, 23.5, 27.0), (32.2, 24.5, 23.9),
    # PETR, baseline real mAP 38.6
    (38.6, 20.2, 47.7), (38.6, 20.4, 47.2), (38.6, 29.3, 24.1), (38.6, 26.1, 32.4),
    # BEVFormer, baseline real mAP 38.4
    (38.4, 29.1, 24.2), (38.4, 31.0, 19.3), (38.4, 31.7, 17.4), (38.4, 33.0, 14.1),
]

MAPPING_GAP_CASES = [
    # online mapping, original split, baseline real mAP 64.5
    (64.5, 54.0, 16.3), (64.5, 55.2, 14.4), (64.5, 56.0, 13.2), (64.5, 56.8, 11.9),
]


def test_criterion_1_gap_arithmetic():
    with criterion(1, "gap arithmetic reproduces the published table within +-0.05"):
        assert len(GAP_CASES) == 12
        for real, sim, printed in GAP_CASES + MAPPING_GAP_CASES:
            assert gap_percent(real, sim) == pytest.approx(printed, abs=0.05)


def test_criterion_2_da_self_agreement_and_symmetry():
    with criterion(2, "DA(A,A)=100 within 1e-6 and DA(A,B)=DA(B,A) exactly, 200 random sets"):
        rng = np.random.default_rng(2024)
        sets = []
        for _ in range(200):
            n_boxes = int(rng.integers(1, 51))
            n_frames = int(rng.integers(1, 4))
            frames = {f"f{k}": [] for k in range(n_frames)}
            for _ in range(n_boxes):
                frames[f"f{int(rng.integers(n_frames))}"].append(random_box(rng))
            sets.append(frames)
        for frames in sets:
            assert detection_agreement(frames, frames) == pytest.approx(100.0, abs=1e-6)
        for a, b in zip(sets[::2], sets[1::2]):
            if set(a) != set(b):
                continue
            assert detection_agreement(a, b) == detection_agreement(b, a)


def test_criterion_3_detection_oracle_equivalence():
    with criterion(3, "evaluate_detections equals the brute-force evaluator within 1e-9, 100 instances"):
        rng = np.random.default_rng(31337)
        for _ in range(100):
            classes = list(rng.choice(
                ["car", "pedestrian", "barrier", "traffic_cone", "bus", "bicycle"],
                size=int(rng.integers(1, 4)), replace=False,
            ))
            frame_ids = [f"f{k}" for k in range(int(rng.integers(1, 4)))]

            def draw(max_total):
                frames = {fid: [] for fid in frame_ids}
                for cls in classes:
                    for _ in range(int(rng.integers(0, max_total + 1))):
                        frames[frame_ids[int(rng.integers(len(frame_ids)))]].append(
                            random_box(rng, class_name=cls)
                        )
                return frames

            gts = draw(10)
            preds = draw(10)
            report = evaluate_detections(preds, gts)
            o_ap, o_tp, o_map, o_nds = oracles.evaluate(preds, gts)
            for key, value in o_ap.items():
                assert report.per_class_ap[key] == pytest.approx(value, abs=1e-9)
            for cls, tp in o_tp.items():
                for name, value in tp.items():
                    mine = getattr(report.per_class_tp[cls], name)
                    if math.isnan(value):
                        assert math.isnan(mine)
                    else:
                        assert mine == pytest.approx(value, abs=1e-9)
            assert report.map_score == pytest.approx(o_map, abs=1e-9)
            assert report.nds == pytest.approx(o_nds, abs=1e-9)


def test_criterion_4_frechet_distance():
    with criterion(4, "Frechet: zero on identical, 1-D analytic = 1, rotation-invariant at D=64"):
        rng = np.random.default_rng(4)
        for dim in (4, 64):
            feats = rng.normal(size=(300, dim)).astype(np.float32)
            assert frechet_distance(feats, feats) <= 1e-6 * dim
        half = 1.0 / math.sqrt(2.0)
        one_d_a = np.array([[-half], [half]])
        assert frechet_distance(one_d_a, one_d_a + 1.0) == pytest.approx(1.0, abs=1e-6)
        a = rng.normal(size=(500, 64))
        b = rng.normal(loc=0.25, scale=1.3, size=(500, 64))
        q, _ = np.linalg.qr(rng.normal(size=(64, 64)))
        assert frechet_distance(a @ q, b @ q) == pytest.approx(frechet_distance(a, b), abs=1e-6)


def test_criterion_5_image_metrics():
    with criterion(5, "SSIM self=1 within 1e-9; PSNR offset-16 = 24.05 +-0.01; PSNR monotone in noise"):
        rng = np.random.default_rng(5)
        img = rng.integers(0, 256, (128, 128, 3)).astype(np.uint8)
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-9)
        a = np.full((64, 64, 3), 90, dtype=np.uint8)
        b = np.full((64, 64, 3), 106, dtype=np.uint8)
        assert psnr(a, b) == pytest.approx(24.05, abs=0.01)
        values = []
        for sigma in (5.0, 10.0, 20.0):
            noise_rng = np.random.default_rng(55)
            noisy = np.clip(img.astype(np.float64) + noise_rng.normal(0, sigma, img.shape), 0, 255)
            values.append(psnr(img, noisy.astype(np.uint8)))
        assert values[0] > values[1] > values[2]


def test_criterion_6_geometry_round_trips():
    with criterion(6, "perturb-inverse round trips within 1e-9; hand cases within 1e-12; DA=100"):
        rng = np.random.default_rng(6)
        boxes = [random_box(rng) for _ in range(1000)]
        lines = [random_polyline(rng) for _ in range(1000)]
        for pert in (EgoPerturbation.lateral(1.7), EgoPerturbation.rotation(-143.0)):
            back = transform_boxes(transform_boxes(boxes, pert), pert.inverse())
            for orig, restored in zip(boxes, back):
                assert restored.center == pytest.approx(orig.center, abs=1e-9)
                assert math.cos(restored.yaw - orig.yaw) == pytest.approx(1.0, abs=1e-9)
            back_lines = transform_polylines(transform_polylines(lines, pert), pert.inverse())
            for orig, restored in zip(lines, back_lines):
                assert np.allclose(restored.as_array(), orig.as_array(), atol=1e-9)

        hand = transform_boxes(
            [random_box(rng, class_name="car")], EgoPerturbation.lateral(2.0)
        )
        box10 = transform_boxes(
            [type(hand[0])("car", (10.0, 0.0, 0.0), (2.0, 4.0, 1.5), 0.0, None, 0.9, None)],
            EgoPerturbation.lateral(2.0),
        )[0]
        assert box10.center == (10.0, -2.0, 0.0)
        rot = transform_boxes(
            [type(hand[0])("car", (10.0, 0.0, 0.0), (2.0, 4.0, 1.5), 0.0, None, 0.9, None)],
            EgoPerturbation.rotation(180.0),
        )[0]
        assert abs(rot.center[0] + 10.0) <= 1e-12
        assert abs(rot.center[1]) <= 1e-12
        assert abs(rot.yaw - math.pi) <= 1e-12

        frames = random_frame_boxes(rng, n_frames=2, max_per_frame=6)
        pert = EgoPerturbation.rotation(77.0)
        tripped = {
            fid: transform_boxes(transform_boxes(bs, pert), pert.inverse())
            for fid, bs in frames.items()
        }
        assert detection_agreement(frames, tripped) == pytest.approx(100.0, abs=1e-9)


def test_criterion_7_augmentation_determinism_and_statistics():
    with criterion(7, "bit-identical parallel/sequential augmentation; noise stats; identity config"):
        rng = np.random.default_rng(7)
        cfg = AugmentConfig()
        images = [(f"img-{i}", rng.integers(0, 256, (64, 64, 3)).astype(np.uint8)) for i in range(24)]
        sequential = [augment_image(img, cfg, 11, name) for name, img in images]
        with ThreadPoolExecutor(max_workers=8) as pool:
            parallel = list(pool.map(lambda t: augment_image(t[1], cfg, 11, t[0]), images))
        for s, p in zip(sequential, parallel):
            assert np.array_equal(s, p)

        noise_cfg = AugmentConfig(p_noise=1.0, noise_sigma=10.0, p_blur=0.0,
                                  p_downup=0.0, p_photometric=0.0)
        uniform = np.full((512, 512, 3), 128, dtype=np.uint8)
        noisy = augment_image(uniform, noise_cfg, 0, "uniform-512")
        assert abs(float(noisy.mean()) - 128.0) <= 0.5
        assert np.all(np.abs(noisy.astype(np.float64).std(axis=(0, 1)) - 10.0) <= 0.5)

        arbitrary = images[0][1]
        assert np.array_equal(augment_image(arbitrary, identity_config(), 99, "x"), arbitrary)


def test_criterion_8_mixing_planner():
    with criterion(8, "mixing boundaries exact; p=0.5 concentration over 10k; deterministic"):
        samples = [f"s{i}" for i in range(10000)]
        rendered = {s: s + ".r" for s in samples}
        zero = plan_mixing(samples, rendered, 0.0, 5, 1)
        assert all(e.source == "real" for e in zero[0].entries)
        one = plan_mixing(samples, rendered, 1.0, 5, 1)
        assert all(e.source == "rendered" for e in one[0].entries)
        half = plan_mixing(samples, rendered, 0.5, 5, 1)
        assert abs(half[0].rendered_fraction() - 0.5) <= 0.02
        again = plan_mixing(samples, rendered, 0.5, 5, 1)
        assert half == again


def test_criterion_9_range_curve_consistency():
    with criterion(9, "range curve: f=1.0 equals plain DA exactly; identical sets constant at 100"):
        rng = np.random.default_rng(9)
        frames = random_frame_boxes(rng, n_frames=3, max_per_frame=5)
        curve = agreement_range_curve(frames, frames)
        assert all(da == 100.0 for _, da in curve)

        from conftest import jitter_boxes

        other = jitter_boxes(rng, frames)
        config = AgreementConfig()
        curve = agreement_range_curve(frames, other, config)
        assert curve[-1][0] == 1.0
        assert curve[-1][1] == detection_agreement(frames, other, config)


def test_criterion_10_correlation_pipeline():
    with criterion(10, "Pearson +-1 on exact lines; noisy DA~-FID cohort r < -0.8 with SVG emission"):
        fids = [20.0 + 7.0 * i for i in range(15)]
        das_up = [3.0 * f + 2.0 for f in fids]
        assert pearson(fids, das_up) == pytest.approx(1.0, abs=1e-12)
        das_down = [-0.5 * f + 90.0 for f in fids]
        assert pearson(fids, das_down) == pytest.approx(-1.0, abs=1e-12)

        rng = np.random.default_rng(10)
        points = []
        for scene in range(40):
            fid = float(rng.uniform(30, 130))
            da = 100.0 - 0.55 * fid + float(rng.normal(0.0, 3.0))
            points.append((fid, da))
        result = correlate_metric("fid", points)
        assert result.pearson_r < -0.8
        svg = scatter_svg([(x, y, "img2img") for x, y in result.points], ("fid", "da"))
        assert svg.startswith("<svg") and svg.count("fill-opacity") == 40
