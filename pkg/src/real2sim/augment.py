"""Rendering-artifact image augmentations and the rendered-data mixing planner.

The augmentation emulates typical neural-rendering artifacts on 8-bit RGB
buffers with four stages in fixed order: additive Gaussian noise, Gaussian
blur, photometric distortion (brightness / contrast / saturation / hue), and
a bilinear down-up resampling pass.  Each stage fires with its configured
probability, values are clamped to [0, 255] and re-quantized after every
stage, and all randomness comes from per-(image, stage) streams so results
do not depend on evaluation order or worker count.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from typing import Mapping, Sequence

import numpy as np

from .errors import SizeError, ValidationError
from .rng import stream


@dataclass(frozen=True)
class AugmentConfig:
    p_noise: float = 0.5
    noise_sigma: float = 10.0
    p_blur: float = 0.5
    blur_kernel: int = 5
    blur_sigma: float = 1.1
    p_downup: float = 0.5
    downup_factor: int = 10
    downup_method: str = "bilinear"
    p_photometric: float = 0.5  # per sub-op
    brightness_delta: tuple[float, float] = (-32.0, 32.0)
    contrast_mult: tuple[float, float] = (0.5, 1.5)
    saturation_mult: tuple[float, float] = (0.5, 1.5)
    hue_delta_deg: tuple[float, float] = (-18.0, 18.0)

    def __post_init__(self) -> None:
        for name in ("p_noise", "p_blur", "p_downup", "p_photometric"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name}={p} outside [0, 1]")
        if self.downup_factor < 1:
            raise ValidationError("downup_factor must be >= 1")
        if self.blur_kernel < 3 or self.blur_kernel % 2 == 0:
            raise ValidationError("blur_kernel must be odd and >= 3")
        if self.downup_method != "bilinear":
            raise ValidationError(f"unsupported downup_method {self.downup_method!r}")
        for name in ("brightness_delta", "contrast_mult", "saturation_mult", "hue_delta_deg"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))

    @classmethod
    def from_json(cls, obj: Mapping) -> "AugmentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValidationError(f"unknown augment config keys: {sorted(unknown)}")
        return cls(**obj)

    def to_json(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


def identity_config() -> AugmentConfig:
    """All stage probabilities zero: the bit-exact identity pipeline."""
    return AugmentConfig(p_noise=0.0, p_blur=0.0, p_downup=0.0, p_photometric=0.0)


def _quantize(img_f: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(img_f), 0.0, 255.0).astype(np.uint8)


def gaussian_kernel_1d(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=float) - (size - 1) / 2.0
    kernel = np.exp(-0.5 * (offsets / sigma) ** 2)
    return kernel / kernel.sum()


def _blur(img_f: np.ndarray, size: int, sigma: float) -> np.ndarray:
    kernel = gaussian_kernel_1d(size, sigma)
    pad = size // 2
    out = np.pad(img_f, ((pad, pad), (0, 0), (0, 0)), mode="reflect")
    out = sum(kernel[t] * out[t : t + img_f.shape[0]] for t in range(size))
    out = np.pad(out, ((0, 0), (pad, pad), (0, 0)), mode="reflect")
    out = sum(kernel[t] * out[:, t : t + img_f.shape[1]] for t in range(size))
    return out


def _resize_bilinear(img_f: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Separable bilinear resize with half-pixel-center coordinate mapping."""
    in_h, in_w = img_f.shape[:2]

    def axis_weights(n_in: int, n_out: int):
        src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        src = np.clip(src, 0.0, n_in - 1.0)
        low = np.floor(src).astype(int)
        high = np.minimum(low + 1, n_in - 1)
        frac = src - low
        return low, high, frac

    y0, y1, wy = axis_weights(in_h, out_h)
    rows = img_f[y0] * (1.0 - wy)[:, None, None] + img_f[y1] * wy[:, None, None]
    x0, x1, wx = axis_weights(in_w, out_w)
    return rows[:, x0] * (1.0 - wx)[None, :, None] + rows[:, x1] * wx[None, :, None]


def _rgb_to_hsv(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """RGB in [0, 1] -> hue in degrees [0, 360), saturation and value in [0, 1]."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    safe_delta = np.where(delta == 0.0, 1.0, delta)
    hue = np.zeros_like(maxc)
    hue = np.where(maxc == r, ((g - b) / safe_delta) % 6.0, hue)
    hue = np.where((maxc == g) & (maxc != r), (b - r) / safe_delta + 2.0, hue)
    hue = np.where((maxc == b) & (maxc != r) & (maxc != g), (r - g) / safe_delta + 4.0, hue)
    hue = np.where(delta == 0.0, 0.0, hue * 60.0) % 360.0
    sat = np.where(maxc == 0.0, 0.0, delta / np.where(maxc == 0.0, 1.0, maxc))
    return hue, sat, maxc


def _hsv_to_rgb(hue: np.ndarray, sat: np.ndarray, val: np.ndarray) -> np.ndarray:
    hp = (hue % 360.0) / 60.0
    c = val * sat
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    zeros = np.zeros_like(c)
    sector = np.floor(hp).astype(int) % 6
    r = np.choose(sector, [c, x, zeros, zeros, x, c])
    g = np.choose(sector, [x, c, c, x, zeros, zeros])
    b = np.choose(sector, [zeros, zeros, x, c, c, x])
    m = val - c
    return np.stack([r + m, g + m, b + m], axis=-1)


def _photometric(img_f: np.ndarray, config: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    # fixed draw layout: 4 gates then 4 parameters, consumed regardless of gating
    gates = rng.random(4)
    brightness = rng.uniform(*config.brightness_delta)
    contrast = rng.uniform(*config.contrast_mult)
    saturation = rng.uniform(*config.saturation_mult)
    hue_delta = rng.uniform(*config.hue_delta_deg)

    out = img_f
    if gates[0] < config.p_photometric:
        out = out + brightness
    if gates[1] < config.p_photometric:
        out = out * contrast
    if gates[2] < config.p_photometric or gates[3] < config.p_photometric:
        hue, sat, val = _rgb_to_hsv(np.clip(out, 0.0, 255.0) / 255.0)
        if gates[2] < config.p_photometric:
            sat = np.clip(sat * saturation, 0.0, 1.0)
        if gates[3] < config.p_photometric:
            hue = (hue + hue_delta) % 360.0
        out = _hsv_to_rgb(hue, sat, val) * 255.0
    return out


def augment_image(
    img: np.ndarray,
    config: AugmentConfig,
    global_seed: int,
    image_id: str,
    epoch: int = 0,
) -> np.ndarray:
    """Apply the four-stage pipeline to one H x W x 3 uint8 buffer.

    Deterministic: the result depends only on the pixel data, the config, and
    the (global_seed, image_id, epoch) stream identifiers.
    """
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise ValidationError(f"expected H x W x 3 uint8 image, got {arr.shape} {arr.dtype}")
    if arr.shape[0] < config.blur_kernel or arr.shape[1] < config.blur_kernel:
        raise SizeError(
            f"image {arr.shape[0]}x{arr.shape[1]} smaller than blur kernel {config.blur_kernel}"
        )
    out = arr

    rng = stream(global_seed, image_id, epoch, "noise")
    if rng.random() < config.p_noise:
        noise = rng.normal(0.0, config.noise_sigma, size=out.shape)
        out = _quantize(out.astype(float) + noise)

    rng = stream(global_seed, image_id, epoch, "blur")
    if rng.random() < config.p_blur:
        out = _quantize(_blur(out.astype(float), config.blur_kernel, config.blur_sigma))

    rng = stream(global_seed, image_id, epoch, "photometric")
    if config.p_photometric > 0.0:
        out = _quantize(_photometric(out.astype(float), config, rng))

    rng = stream(global_seed, image_id, epoch, "downup")
    if rng.random() < config.p_downup:
        h, w = out.shape[:2]
        down_h = max(1, h // config.downup_factor)
        down_w = max(1, w // config.downup_factor)
        small = _resize_bilinear(out.astype(float), down_h, down_w)
        out = _quantize(_resize_bilinear(small, h, w))

    return out


@dataclass(frozen=True)
class MixEntry:
    sample_id: str
    chosen_path: str
    source: str  # "real" | "rendered"

    def to_json(self) -> dict:
        return {"sample_id": self.sample_id, "chosen_path": self.chosen_path, "source": self.source}


@dataclass(frozen=True)
class MixingPlan:
    epoch: int
    entries: tuple[MixEntry, ...] = field(default_factory=tuple)

    def rendered_fraction(self) -> float:
        if not self.entries:
            return 0.0
        return sum(e.source == "rendered" for e in self.entries) / len(self.entries)


def plan_mixing(
    train_samples: Sequence[str],
    rendered_map: Mapping[str, str],
    p: float,
    seed: int,
    epochs: int,
    real_paths: Mapping[str, str] | None = None,
) -> list[MixingPlan]:
    """Plan which samples use their rendered counterpart, per epoch.

    Each sample with an entry in ``rendered_map`` independently picks the
    rendered path with probability ``p``; everything else stays real.  Real
    paths default to the sample id itself when no mapping is supplied.
    """
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"mixing probability {p} outside [0, 1]")
    samples = list(train_samples)
    if len(set(samples)) != len(samples):
        raise ValidationError("train_samples contains duplicates")
    missing = set(rendered_map) - set(samples)
    if missing:
        raise ValidationError(f"rendered_map ids not in train_samples: {sorted(missing)}")

    plans = []
    for epoch in range(epochs):
        entries = []
        for sample_id in samples:
            use_rendered = (
                sample_id in rendered_map
                and stream(seed, sample_id, epoch, "mix").random() < p
            )
            if use_rendered:
                entries.append(MixEntry(sample_id, rendered_map[sample_id], "rendered"))
            else:
                real = real_paths[sample_id] if real_paths is not None else sample_id
                entries.append(MixEntry(sample_id, real, "real"))
        plans.append(MixingPlan(epoch, tuple(entries)))
    return plans


def write_mixing_plans(plans: Sequence[MixingPlan], path) -> None:
    """JSON-lines output, one entry per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for plan in plans:
            for entry in plan.entries:
                record = {"epoch": plan.epoch, **entry.to_json()}
                fh.write(json.dumps(record, sort_keys=True) + "\n")
