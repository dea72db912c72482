from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from real2sim.augment import (
    AugmentConfig,
    augment_image,
    gaussian_kernel_1d,
    identity_config,
    plan_mixing,
    write_mixing_plans,
)
from real2sim.errors import SizeError, ValidationError
from real2sim.rng import fnv1a64, stream


def random_image(rng, h=64, w=96):
    return rng.integers(0, 256, size=(h, w, 3)).astype(np.uint8)


# --- RNG derivation -------------------------------------------------------

def test_fnv1a64_known_vectors():
    # standard FNV-1a 64-bit test vectors
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


def test_streams_are_independent_of_call_order():
    a1 = stream(1, "x", 0, "noise").random(4)
    b1 = stream(1, "y", 0, "noise").random(4)
    b2 = stream(1, "y", 0, "noise").random(4)
    a2 = stream(1, "x", 0, "noise").random(4)
    np.testing.assert_array_equal(a1, a2)
    np.testing.assert_array_equal(b1, b2)
    assert not np.array_equal(a1, b1)


# --- augment_image --------------------------------------------------------

def test_all_probabilities_zero_is_identity(rng):
    img = random_image(rng)
    out = augment_image(img, identity_config(), 99, "some-image")
    assert out.dtype == np.uint8
    np.testing.assert_array_equal(out, img)


def test_deterministic_per_image_id(rng):
    img = random_image(rng)
    cfg = AugmentConfig()
    a = augment_image(img, cfg, 7, "img-1")
    b = augment_image(img, cfg, 7, "img-1")
    np.testing.assert_array_equal(a, b)
    c = augment_image(img, cfg, 7, "img-2")
    d = augment_image(img, cfg, 8, "img-1")
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_epoch_changes_stream(rng):
    img = random_image(rng)
    cfg = AugmentConfig(p_noise=1.0, p_blur=0.0, p_downup=0.0, p_photometric=0.0)
    a = augment_image(img, cfg, 7, "img-1", epoch=0)
    b = augment_image(img, cfg, 7, "img-1", epoch=1)
    assert not np.array_equal(a, b)


def test_parallel_equals_sequential(rng):
    cfg = AugmentConfig()
    images = [(f"img-{i}", random_image(rng, 48, 48)) for i in range(16)]
    sequential = [augment_image(img, cfg, 3, name) for name, img in images]
    with ThreadPoolExecutor(max_workers=8) as pool:
        parallel = list(pool.map(lambda t: augment_image(t[1], cfg, 3, t[0]), images))
    for s, p in zip(sequential, parallel):
        np.testing.assert_array_equal(s, p)


def test_noise_statistics():
    cfg = AugmentConfig(p_noise=1.0, noise_sigma=10.0, p_blur=0.0, p_downup=0.0, p_photometric=0.0)
    img = np.full((512, 512, 3), 128, dtype=np.uint8)
    out = augment_image(img, cfg, 0, "uniform")
    assert abs(float(out.mean()) - 128.0) < 0.5
    stds = out.astype(np.float64).std(axis=(0, 1))
    assert np.all(np.abs(stds - 10.0) < 0.5)


def test_blur_keeps_constant_image():
    cfg = AugmentConfig(p_noise=0.0, p_blur=1.0, p_downup=0.0, p_photometric=0.0)
    img = np.full((32, 40, 3), 201, dtype=np.uint8)
    np.testing.assert_array_equal(augment_image(img, cfg, 0, "const"), img)


def test_blur_smooths_noise(rng):
    cfg = AugmentConfig(p_noise=0.0, p_blur=1.0, p_downup=0.0, p_photometric=0.0)
    img = random_image(rng, 128, 128)
    out = augment_image(img, cfg, 0, "n")
    assert out.astype(float).std() < img.astype(float).std()


def test_downup_loses_detail(rng):
    cfg = AugmentConfig(p_noise=0.0, p_blur=0.0, p_downup=1.0, p_photometric=0.0, downup_factor=10)
    img = random_image(rng, 120, 120)
    out = augment_image(img, cfg, 0, "d")
    assert out.shape == img.shape
    assert not np.array_equal(out, img)
    assert out.astype(float).std() < img.astype(float).std()


def test_photometric_stays_in_range(rng):
    cfg = AugmentConfig(p_noise=0.0, p_blur=0.0, p_downup=0.0, p_photometric=1.0)
    for i in range(5):
        img = random_image(rng, 32, 32)
        out = augment_image(img, cfg, i, f"p{i}")
        assert out.dtype == np.uint8
        assert out.shape == img.shape


def test_output_range_and_shape_all_stages(rng):
    cfg = AugmentConfig(p_noise=1.0, p_blur=1.0, p_downup=1.0, p_photometric=1.0)
    img = random_image(rng, 50, 70)
    out = augment_image(img, cfg, 5, "full")
    assert out.shape == img.shape
    assert out.dtype == np.uint8


def test_image_smaller_than_kernel(rng):
    with pytest.raises(SizeError):
        augment_image(random_image(rng, 4, 40), AugmentConfig(), 0, "tiny")


def test_config_validation():
    with pytest.raises(ValidationError):
        AugmentConfig(p_noise=1.2)
    with pytest.raises(ValidationError):
        AugmentConfig(blur_kernel=4)
    with pytest.raises(ValidationError):
        AugmentConfig(downup_factor=0)
    with pytest.raises(ValidationError):
        AugmentConfig.from_json({"p_noise": 0.5, "bogus": 1})
    cfg = AugmentConfig.from_json(json.loads(json.dumps(AugmentConfig().to_json())))
    assert cfg == AugmentConfig()


def test_gaussian_kernel_normalized():
    k = gaussian_kernel_1d(5, 1.1)
    assert k.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(k[:-1][:2] < k[2])  # peak at center


# --- mixing planner -------------------------------------------------------

def test_mixing_boundaries():
    samples = [f"s{i}" for i in range(50)]
    rendered = {s: f"render/{s}.png" for s in samples[:30]}
    all_real = plan_mixing(samples, rendered, 0.0, 1, 3)
    assert all(e.source == "real" for plan in all_real for e in plan.entries)
    all_rendered = plan_mixing(samples, rendered, 1.0, 1, 3)
    for plan in all_rendered:
        for entry in plan.entries:
            expected = "rendered" if entry.sample_id in rendered else "real"
            assert entry.source == expected


def test_mixing_every_sample_once_per_epoch():
    samples = [f"s{i}" for i in range(100)]
    rendered = {s: s + ".r" for s in samples[::2]}
    plans = plan_mixing(samples, rendered, 0.5, 3, 4)
    assert len(plans) == 4
    for plan in plans:
        assert [e.sample_id for e in plan.entries] == samples


def test_mixing_concentration():
    samples = [f"s{i}" for i in range(10000)]
    rendered = {s: s + ".r" for s in samples}
    plans = plan_mixing(samples, rendered, 0.5, 123, 1)
    assert abs(plans[0].rendered_fraction() - 0.5) < 0.02


def test_mixing_deterministic():
    samples = [f"s{i}" for i in range(200)]
    rendered = {s: s + ".r" for s in samples[:120]}
    a = plan_mixing(samples, rendered, 0.3, 42, 2)
    b = plan_mixing(samples, rendered, 0.3, 42, 2)
    assert a == b
    c = plan_mixing(samples, rendered, 0.3, 43, 2)
    assert a != c


def test_mixing_rejects_unknown_rendered_ids():
    with pytest.raises(ValidationError):
        plan_mixing(["a"], {"b": "b.r"}, 0.5, 0, 1)


def test_mixing_jsonl_output(tmp_path):
    plans = plan_mixing(["a", "b"], {"a": "a.r"}, 1.0, 0, 2)
    out = tmp_path / "plan.jsonl"
    write_mixing_plans(plans, out)
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 4
    first = json.loads(lines[0])
    assert first == {"chosen_path": "a.r", "epoch": 0, "sample_id": "a", "source": "rendered"}
