"""Image and geometry similarity metrics: windowed SSIM and Hausdorff distance."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import correlate1d
from scipy.spatial import cKDTree

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class SsimParams:
    """Gaussian-window SSIM parameters (window 11, sigma 1.5, k1 0.01, k2 0.03)."""

    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def __post_init__(self) -> None:
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window_size must be odd and >= 3, got {self.window_size}")
        if not (self.sigma > 0 and self.k1 > 0 and self.k2 > 0 and self.dynamic_range > 0):
            raise ValueError("sigma, k1, k2 and dynamic_range must be positive")


def _gaussian_kernel(params: SsimParams) -> np.ndarray:
    half = params.window_size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * params.sigma * params.sigma))
    return k / k.sum()


def _window_mean(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Separable Gaussian window, reflect padding at borders.
    out = correlate1d(img, kernel, axis=0, mode="reflect")
    return correlate1d(out, kernel, axis=1, mode="reflect")


def to_luma(rgb: np.ndarray) -> np.ndarray:
    """RGB (H, W, 3) to luma (H, W) float64 with ITU BT.601 weights."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = LUMA_WEIGHTS
    return rgb[..., 0] * r + rgb[..., 1] * g + rgb[..., 2] * b


def ssim_map(a: np.ndarray, b: np.ndarray, params: SsimParams = SsimParams()) -> np.ndarray:
    """Per-pixel SSIM between two images.

    RGB inputs are converted to luma first. Gaussian-weighted local statistics
    use reflect padding so every pixel has a well-defined window.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 3:
        if a.shape[2] != 3:
            raise ValueError(f"expected 3 channels, got {a.shape[2]}")
        a, b = to_luma(a), to_luma(b)
    elif a.ndim != 2:
        raise ValueError(f"images must be 2D or (H, W, 3), got shape {a.shape}")

    kern = _gaussian_kernel(params)
    mu_a = _window_mean(a, kern)
    mu_b = _window_mean(b, kern)
    ea2 = _window_mean(a * a, kern)
    eb2 = _window_mean(b * b, kern)
    eab = _window_mean(a * b, kern)
    var_a = ea2 - mu_a * mu_a
    var_b = eb2 - mu_b * mu_b
    cov = eab - mu_a * mu_b

    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    # The true value never leaves [-1, 1]; the E[x^2] - mu^2 variance form can
    # overshoot by ~1e-14 on near-identical windows, so pin the bound here.
    return np.clip(num / den, -1.0, 1.0)


def ssim(
    a: np.ndarray,
    b: np.ndarray,
    mask: np.ndarray | None = None,
    params: SsimParams = SsimParams(),
) -> float:
    """Mean SSIM, optionally restricted to pixels whose window center is in `mask`.

    Args:
        a, b: images of identical shape, 2D or (H, W, 3) RGB.
        mask: optional boolean (H, W) validity mask; the mean runs over mask
            centers only. Must select at least one pixel.
        params: window and stabilizer constants.
    """
    smap = ssim_map(a, b, params)
    if mask is None:
        return float(smap.mean())
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != smap.shape:
        raise ValueError(f"mask shape {mask.shape} does not match image {smap.shape}")
    if not mask.any():
        raise ValueError("mask selects no pixels")
    return float(smap[mask].mean())


def ssim_depth(
    a: np.ndarray,
    b: np.ndarray,
    mask: np.ndarray | None = None,
    range_m: float = 10.0,
    params: SsimParams | None = None,
) -> float:
    """SSIM between depth maps: clamp to [0, range_m], rescale to [0, 1], L = 1."""
    if not range_m > 0:
        raise ValueError(f"range_m must be positive, got {range_m}")
    base = params if params is not None else SsimParams()
    scaled_params = replace(base, dynamic_range=1.0)
    a = np.clip(np.asarray(a, dtype=np.float64), 0.0, range_m) / range_m
    b = np.clip(np.asarray(b, dtype=np.float64), 0.0, range_m) / range_m
    return ssim(a, b, mask=mask, params=scaled_params)


@dataclass(frozen=True)
class HausdorffParams:
    overlap_margin: float = 0.05

    def __post_init__(self) -> None:
        if self.overlap_margin < 0:
            raise ValueError(f"overlap_margin must be nonnegative, got {self.overlap_margin}")


@dataclass(frozen=True)
class HausdorffResult:
    distance: float
    directed_ab: float
    directed_ba: float
    count_a: int
    count_b: int


class NoOverlapError(Exception):
    """The overlap crop left one of the clouds empty."""


def _crop_to_overlap(a: np.ndarray, b: np.ndarray, margin: float) -> tuple[np.ndarray, np.ndarray]:
    lo = np.maximum(a.min(axis=0), b.min(axis=0)) - margin
    hi = np.minimum(a.max(axis=0), b.max(axis=0)) + margin
    a_in = a[((a >= lo) & (a <= hi)).all(axis=1)]
    b_in = b[((b >= lo) & (b <= hi)).all(axis=1)]
    return a_in, b_in


def _nn_distances(query: np.ndarray, ref: np.ndarray) -> np.ndarray:
    # The tree picks the neighbor; the distance is recomputed with plain numpy
    # so it rounds identically to a brute-force scan.
    _, idx = cKDTree(ref).query(query, k=1)
    d = query - ref[idx]
    return np.sqrt((d * d).sum(axis=1))


def hausdorff(
    a: np.ndarray | "object",
    b: np.ndarray | "object",
    params: HausdorffParams = HausdorffParams(),
) -> HausdorffResult:
    """Symmetric Hausdorff distance between two point sets on their overlap.

    Both clouds are cropped to the intersection of their axis-aligned bounding
    boxes expanded by `overlap_margin` before exact nearest-neighbor distances
    are taken; points outside the region of mutual coverage are ignored.

    Args:
        a, b: (N, 3) arrays or PointCloud instances.
        params: overlap margin in meters.

    Returns:
        HausdorffResult with the symmetric distance, both directed distances,
        and the cropped point counts. Raises NoOverlapError when the crop
        empties either cloud.
    """
    pa = np.asarray(getattr(a, "points", a), dtype=np.float64)
    pb = np.asarray(getattr(b, "points", b), dtype=np.float64)
    for name, arr in (("a", pa), ("b", pb)):
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
            raise ValueError(f"cloud {name} must be a nonempty (N, 3) array, got {arr.shape}")
    ca, cb = _crop_to_overlap(pa, pb, params.overlap_margin)
    if ca.shape[0] == 0 or cb.shape[0] == 0:
        raise NoOverlapError(
            f"overlap crop (margin {params.overlap_margin}) left {ca.shape[0]} and "
            f"{cb.shape[0]} points"
        )
    d_ab = float(_nn_distances(ca, cb).max())
    d_ba = float(_nn_distances(cb, ca).max())
    return HausdorffResult(
        distance=max(d_ab, d_ba),
        directed_ab=d_ab,
        directed_ba=d_ba,
        count_a=int(ca.shape[0]),
        count_b=int(cb.shape[0]),
    )
