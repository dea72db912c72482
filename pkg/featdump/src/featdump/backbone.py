"""Feature backbone and perceptual distance model.

The feature extractor is the standard inception-v3 trunk with the classifier
removed, giving the 2048-dimensional pooled embedding conventional for
Fréchet-distance comparisons.  Pretrained weights are used when available;
in offline environments the same architecture is initialized from a fixed
seed instead, which keeps every contract (dimension, determinism, ordering)
intact while the absolute feature values differ from the published
convention.  The perceptual distance averages unit-normalized feature
differences over five vgg16 activation taps.
"""

from __future__ import annotations

import contextlib
import io
from functools import lru_cache

import numpy as np
import torch
import torch.nn.functional as F
from torchvision.models import inception_v3, vgg16

FEATURE_DIM = 2048
FEATURE_INPUT_SIZE = 299
PERCEPTUAL_INPUT_SIZE = 224

# fixed initialization seeds: outputs must be stable across runs
_INCEPTION_SEED = 0x52325346  # "R2SF"
_VGG_SEED = 0x4C504950  # "LPIP"

# vgg16.features indices after relu1_2, relu2_2, relu3_3, relu4_3, relu5_3
_VGG_TAPS = (3, 8, 15, 22, 29)


def _try_pretrained(builder, weights_enum):
    try:
        # hide torch's download chatter when the attempt fails offline
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            return builder(weights=weights_enum), True
    except Exception:
        return None, False


@lru_cache(maxsize=1)
def feature_model() -> tuple[torch.nn.Module, str]:
    """The 2048-d pooled extractor plus a tag naming the weight source."""
    from torchvision.models import Inception_V3_Weights

    model, pretrained = _try_pretrained(inception_v3, Inception_V3_Weights.DEFAULT)
    if pretrained:
        tag = "inception_v3/pretrained"
    else:
        torch.manual_seed(_INCEPTION_SEED)
        model = inception_v3(weights=None, aux_logits=True, init_weights=True)
        tag = "inception_v3/seeded-fallback"
    model.fc = torch.nn.Identity()
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    return model, tag


@lru_cache(maxsize=1)
def perceptual_model() -> tuple[torch.nn.Module, str]:
    from torchvision.models import VGG16_Weights

    model, pretrained = _try_pretrained(vgg16, VGG16_Weights.DEFAULT)
    if pretrained:
        tag = "vgg16/pretrained"
    else:
        torch.manual_seed(_VGG_SEED)
        model = vgg16(weights=None)
        tag = "vgg16/seeded-fallback"
    features = model.features.eval()
    for p in features.parameters():
        p.requires_grad_(False)
    return features, tag


def preprocess(img: np.ndarray, size: int) -> torch.Tensor:
    """H x W x 3 uint8 -> 1 x 3 x size x size tensor in [-1, 1], bilinear."""
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise ValueError(f"expected H x W x 3 uint8 image, got {img.shape} {img.dtype}")
    t = torch.from_numpy(img.astype(np.float32) / 255.0).permute(2, 0, 1)[None]
    t = F.interpolate(t, size=(size, size), mode="bilinear", align_corners=False)
    return (t - 0.5) / 0.5


def extract_features(images: list[np.ndarray], batch_size: int = 8, device: str = "cpu") -> np.ndarray:
    """Pooled 2048-d features, one row per image, in input order."""
    model, _ = feature_model()
    model = model.to(device)
    rows = []
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            batch = torch.cat(
                [preprocess(img, FEATURE_INPUT_SIZE) for img in images[start : start + batch_size]]
            ).to(device)
            rows.append(model(batch).cpu().numpy())
    if not rows:
        return np.zeros((0, FEATURE_DIM), dtype=np.float32)
    return np.concatenate(rows).astype(np.float32)


def perceptual_distance(a: np.ndarray, b: np.ndarray, device: str = "cpu") -> float:
    """Unit-normalized multi-layer feature distance; 0 for identical images."""
    if a.shape != b.shape:
        raise ValueError(f"pair shapes differ: {a.shape} vs {b.shape}")
    features, _ = perceptual_model()
    features = features.to(device)
    with torch.no_grad():
        batch = torch.cat(
            [preprocess(a, PERCEPTUAL_INPUT_SIZE), preprocess(b, PERCEPTUAL_INPUT_SIZE)]
        ).to(device)
        total = 0.0
        current = batch
        for i, layer in enumerate(features):
            current = layer(current)
            if i in _VGG_TAPS:
                unit = current / (current.norm(dim=1, keepdim=True) + 1e-10)
                diff = (unit[0] - unit[1]) ** 2
                total += float(diff.sum(dim=0).mean())
    return total


def backbone_metadata() -> dict:
    _, feature_tag = feature_model()
    _, perceptual_tag = perceptual_model()
    return {
        "feature_backbone": feature_tag,
        "feature_dim": FEATURE_DIM,
        "feature_input": f"{FEATURE_INPUT_SIZE}x{FEATURE_INPUT_SIZE} bilinear, scaled to [-1, 1]",
        "perceptual_backbone": perceptual_tag,
        "perceptual_input": f"{PERCEPTUAL_INPUT_SIZE}x{PERCEPTUAL_INPUT_SIZE} bilinear, scaled to [-1, 1]",
    }
