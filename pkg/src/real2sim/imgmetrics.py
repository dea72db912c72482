"""Image reconstruction metrics and per-scene aggregation.

PSNR and SSIM compare pixel-aligned image pairs; the Fréchet distance
compares Gaussian fits of deep-feature distributions and therefore needs no
pixel alignment, which is what makes it usable on extrapolated views.
LPIPS is never computed here: it is ingested from a CSV produced by the
feature-dump helper.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.signal import convolve2d

from .errors import (
    DimMismatchError,
    EmptySceneError,
    InsufficientSamplesError,
    ParseError,
    ShapeMismatchError,
    TooSmallError,
)
from .types import FeatureSet

# value used in place of the infinite-PSNR sentinel when averaging
PSNR_CAP_DB = 100.0


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for 8-bit images; inf for identical."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a.astype(np.float64) - b.astype(np.float64)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-0.5 * (offsets / sigma) ** 2)
    g /= g.sum()
    return np.outer(g, g)


def ssim(
    a: np.ndarray,
    b: np.ndarray,
    window: int = 11,
    sigma: float = 1.5,
    k1: float = 0.01,
    k2: float = 0.03,
    data_range: float = 255.0,
) -> float:
    """Mean structural similarity with a Gaussian window, valid region only.

    Computed per channel and averaged; no padding is used, so statistics come
    exclusively from fully supported windows.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"image shapes differ: {a.shape} vs {b.shape}")
    if min(a.shape[0], a.shape[1]) < window:
        raise TooSmallError(f"image {a.shape[:2]} smaller than the {window}x{window} window")

    if a.ndim == 2:
        a = a[:, :, None]
        b = b[:, :, None]
    win = _gaussian_window(window, sigma)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2

    scores = []
    for ch in range(a.shape[2]):
        x = a[:, :, ch].astype(np.float64)
        y = b[:, :, ch].astype(np.float64)
        mu_x = convolve2d(x, win, mode="valid")
        mu_y = convolve2d(y, win, mode="valid")
        var_x = convolve2d(x * x, win, mode="valid") - mu_x * mu_x
        var_y = convolve2d(y * y, win, mode="valid") - mu_y * mu_y
        cov_xy = convolve2d(x * y, win, mode="valid") - mu_x * mu_y
        ssim_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2)) / (
            (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
        )
        scores.append(float(ssim_map.mean()))
    return float(np.mean(scores))


def _sym_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Matrix square root via symmetric eigendecomposition, spectrum clamped at 0."""
    eigvals, eigvecs = np.linalg.eigh((matrix + matrix.T) / 2.0)
    eigvals = np.maximum(eigvals, 0.0)
    return (eigvecs * np.sqrt(eigvals)) @ eigvecs.T


def frechet_distance(a: FeatureSet | np.ndarray, b: FeatureSet | np.ndarray, eps: float = 1e-6) -> float:
    """Squared Fréchet distance between Gaussian fits of two feature sets.

    d^2 = |mu_a - mu_b|^2 + Tr(Sa + Sb - 2 sqrt(Sa^1/2 Sb Sa^1/2)) with
    unbiased covariances and eps * I added to both, the symmetrized product
    keeping every eigendecomposition real-symmetric.
    """
    fa = a.features if isinstance(a, FeatureSet) else np.asarray(a)
    fb = b.features if isinstance(b, FeatureSet) else np.asarray(b)
    if fa.ndim != 2 or fb.ndim != 2:
        raise DimMismatchError("feature sets must be 2-D (N x D)")
    if fa.shape[1] != fb.shape[1]:
        raise DimMismatchError(f"feature dims differ: {fa.shape[1]} vs {fb.shape[1]}")
    if fa.shape[0] < 2 or fb.shape[0] < 2:
        raise InsufficientSamplesError("need at least 2 samples per side for a covariance")

    fa = fa.astype(np.float64)
    fb = fb.astype(np.float64)
    dim = fa.shape[1]
    mu_diff = fa.mean(axis=0) - fb.mean(axis=0)
    cov_a = np.cov(fa, rowvar=False).reshape(dim, dim) + eps * np.eye(dim)
    cov_b = np.cov(fb, rowvar=False).reshape(dim, dim) + eps * np.eye(dim)

    sqrt_a = _sym_sqrt(cov_a)
    inner = sqrt_a @ cov_b @ sqrt_a
    eigvals = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    trace_sqrt = float(np.sqrt(np.maximum(eigvals, 0.0)).sum())

    d2 = float(mu_diff @ mu_diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * trace_sqrt)
    return max(d2, 0.0)


@dataclass(frozen=True)
class ImagePairMetrics:
    image_id: str
    psnr: float
    ssim: float
    lpips: float | None = None


def compare_pair(img_a: np.ndarray, img_b: np.ndarray, image_id: str, lpips: float | None = None) -> ImagePairMetrics:
    return ImagePairMetrics(image_id, psnr(img_a, img_b), ssim(img_a, img_b), lpips)


@dataclass(frozen=True)
class SceneMetrics:
    scene_id: str
    mean_psnr: float
    mean_ssim: float
    mean_lpips: float | None
    fid: float | None
    da: float | None

    CSV_HEADER = "scene_id,psnr,ssim,lpips,fid,da"

    def csv_row(self) -> str:
        def fmt(value):
            return "" if value is None else repr(float(value))

        return ",".join(
            [self.scene_id, fmt(self.mean_psnr), fmt(self.mean_ssim), fmt(self.mean_lpips), fmt(self.fid), fmt(self.da)]
        )


def aggregate_scene(
    scene_id: str,
    pair_metrics: Sequence[ImagePairMetrics],
    feats_real: FeatureSet | None = None,
    feats_sim: FeatureSet | None = None,
    da: float | None = None,
) -> SceneMetrics:
    """Arithmetic means over a scene's image pairs plus its FID and DA.

    Infinite PSNR aggregates as the 100 dB cap so scene means stay bounded.
    """
    if not pair_metrics:
        raise EmptySceneError(f"scene {scene_id!r} has no image pairs")
    psnrs = [min(m.psnr, PSNR_CAP_DB) for m in pair_metrics]
    ssims = [m.ssim for m in pair_metrics]
    lpips_values = [m.lpips for m in pair_metrics if m.lpips is not None]
    fid = None
    if feats_real is not None and feats_sim is not None:
        fid = frechet_distance(feats_real, feats_sim)
    return SceneMetrics(
        scene_id=scene_id,
        mean_psnr=float(np.mean(psnrs)),
        mean_ssim=float(np.mean(ssims)),
        mean_lpips=float(np.mean(lpips_values)) if lpips_values else None,
        fid=fid,
        da=da,
    )


def read_lpips_csv(path) -> dict[str, float]:
    """Ingest the helper-produced per-pair LPIPS file (header image_id,lpips)."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty LPIPS CSV") from None
        if header != ["image_id", "lpips"]:
            raise ParseError(f"{path}: expected header 'image_id,lpips', got {header}")
        out: dict[str, float] = {}
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise ParseError(f"{path}:{line_no}: expected 2 columns, got {len(row)}")
            try:
                out[row[0]] = float(row[1])
            except ValueError as exc:
                raise ParseError(f"{path}:{line_no}: bad LPIPS value {row[1]!r}") from exc
    return out


def write_scene_metrics_csv(rows: Sequence[SceneMetrics], path) -> None:
    text = SceneMetrics.CSV_HEADER + "\n" + "".join(row.csv_row() + "\n" for row in rows)
    Path(path).write_text(text, encoding="utf-8")
