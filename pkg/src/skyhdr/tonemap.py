"""Tone mapping: radiance maps to displayable 8-bit images.

Both operators equalize the log-luminance histogram (the per-pixel mean of
the three log-radiance channels) and reattach color by per-channel ratio
preservation.  The adaptive variant builds one clipped histogram mapping
per tile and blends the four surrounding tile mappings bilinearly, the
contrast-limited scheme; with a single tile and an unreachable clip limit
it reduces bit-exactly to the global operator.

Every arithmetic step below is deliberately pinned (floor-based binning,
integer mapping tables, round-half-up) so small instances can be checked
exactly against a brute-force reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RadianceMap, RasterImage8

_BINS = 256


@dataclass(frozen=True)
class TonemapConfig:
    """Tile grid, histogram clip fraction and bin count for adaptive mapping."""

    tiles_x: int = 8
    tiles_y: int = 8
    clip_limit: float = 0.01
    bins: int = _BINS

    def __post_init__(self) -> None:
        if self.tiles_x < 1 or self.tiles_y < 1:
            raise ValueError("tile grid must be at least 1x1")
        if not (self.clip_limit > 0):
            raise ValueError(f"clip limit must be positive, got {self.clip_limit}")
        if self.bins < 2:
            raise ValueError(f"need at least 2 histogram bins, got {self.bins}")


def _log_luminance(rmap: RadianceMap) -> np.ndarray:
    d = rmap.data.astype(np.float64)
    return (d[:, :, 0] + d[:, :, 1] + d[:, :, 2]) / 3.0


def _bin_indices(lum: np.ndarray, lo: float, hi: float, bins: int) -> np.ndarray:
    if hi == lo:
        return np.zeros(lum.shape, dtype=np.int64)
    # Invalid pixels may sit outside [lo, hi] (or be non-finite in maps read
    # without a mask); their bin is irrelevant but must not trip the cast.
    lum = np.where(np.isfinite(lum), lum, lo)
    t = np.clip((lum - lo) / (hi - lo), 0.0, 1.0)
    b = (t * bins).astype(np.int64)
    return np.clip(b, 0, bins - 1)


def _clip_histogram(hist: np.ndarray, clip_count: int) -> np.ndarray:
    """Clip bins at clip_count and spread the excess uniformly over all bins."""
    excess = int(np.maximum(hist - clip_count, 0).sum())
    clipped = np.minimum(hist, clip_count)
    base, rem = divmod(excess, hist.size)
    clipped = clipped + base
    clipped[:rem] += 1
    return clipped


def _mapping(hist: np.ndarray) -> np.ndarray:
    """Equalization table: bin index to output level, round-half-up."""
    cdf = np.cumsum(hist) / hist.sum()
    return np.floor(255.0 * cdf + 0.5).astype(np.int64)


def _attach_color(rmap: RadianceMap, lum: np.ndarray, level: np.ndarray,
                  valid: np.ndarray) -> RasterImage8:
    """Rebuild RGB around the equalized luminance, preserving channel ratios."""
    d = rmap.data.astype(np.float64)
    ratio = np.exp(d - lum[:, :, None])
    out = np.floor(level[:, :, None] * ratio + 0.5)
    out = np.clip(out, 0.0, 255.0).astype(np.uint8)
    out[~valid] = 0
    return RasterImage8(out)


def equalize_global(rmap: RadianceMap) -> RasterImage8:
    """Histogram-equalize log luminance over the whole map."""
    valid = rmap.valid_mask()
    if not valid.any():
        raise ValueError("radiance map has no valid pixels")
    lum = _log_luminance(rmap)
    lo = float(lum[valid].min())
    hi = float(lum[valid].max())
    b = _bin_indices(lum, lo, hi, _BINS)
    hist = np.bincount(b[valid], minlength=_BINS)
    lut = _mapping(hist)
    level = lut[b].astype(np.float64)
    return _attach_color(rmap, lum, level, valid)


def _tile_edges(size: int, tiles: int) -> list[tuple[int, int]]:
    return [((t * size) // tiles, ((t + 1) * size) // tiles) for t in range(tiles)]


def _axis_interp(size: int, edges: list[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Neighbor tile indices and blend fractions for every coordinate on an axis.

    Tiles are anchored at their pixel centers; coordinates beyond the first
    or last center take that tile alone (fraction 0).
    """
    centers = np.array([(a + b - 1) / 2.0 for a, b in edges])
    coords = np.arange(size, dtype=np.float64)
    if len(edges) == 1:
        zero = np.zeros(size, dtype=np.int64)
        return zero, zero, np.zeros(size, dtype=np.float64)
    idx = np.searchsorted(centers, coords, side="right") - 1
    t1 = np.clip(idx, 0, len(edges) - 1)
    t2 = np.clip(idx + 1, 0, len(edges) - 1)
    frac = np.zeros(size, dtype=np.float64)
    mid = (idx >= 0) & (idx < len(edges) - 1)
    frac[mid] = (coords[mid] - centers[t1[mid]]) / (centers[t2[mid]] - centers[t1[mid]])
    return t1, t2, frac


def equalize_adaptive(rmap: RadianceMap, config: TonemapConfig) -> RasterImage8:
    """Tile-local clipped-histogram equalization with bilinear blending."""
    if rmap.width < config.tiles_x or rmap.height < config.tiles_y:
        raise ValueError(
            f"{rmap.width}x{rmap.height} map is smaller than the "
            f"{config.tiles_x}x{config.tiles_y} tile grid"
        )
    valid = rmap.valid_mask()
    if not valid.any():
        raise ValueError("radiance map has no valid pixels")
    lum = _log_luminance(rmap)
    lo = float(lum[valid].min())
    hi = float(lum[valid].max())
    bins = config.bins
    b = _bin_indices(lum, lo, hi, bins)

    # Tiles with no valid pixels borrow the unclipped whole-image mapping.
    global_lut = _mapping(np.bincount(b[valid], minlength=bins))

    x_edges = _tile_edges(rmap.width, config.tiles_x)
    y_edges = _tile_edges(rmap.height, config.tiles_y)
    luts = np.empty((config.tiles_y, config.tiles_x, bins), dtype=np.int64)
    for ty, (y0, y1) in enumerate(y_edges):
        for tx, (x0, x1) in enumerate(x_edges):
            tile_valid = valid[y0:y1, x0:x1]
            n_tile = int(tile_valid.sum())
            if n_tile == 0:
                luts[ty, tx] = global_lut
                continue
            hist = np.bincount(b[y0:y1, x0:x1][tile_valid], minlength=bins)
            clip_count = max(1, math.ceil(config.clip_limit * n_tile))
            luts[ty, tx] = _mapping(_clip_histogram(hist, clip_count))

    tx1, tx2, fx = _axis_interp(rmap.width, x_edges)
    ty1, ty2, fy = _axis_interp(rmap.height, y_edges)
    m00 = luts[ty1[:, None], tx1[None, :], b]
    m01 = luts[ty1[:, None], tx2[None, :], b]
    m10 = luts[ty2[:, None], tx1[None, :], b]
    m11 = luts[ty2[:, None], tx2[None, :], b]
    fxr = fx[None, :]
    fyr = fy[:, None]
    level = (1.0 - fyr) * ((1.0 - fxr) * m00 + fxr * m01) + fyr * ((1.0 - fxr) * m10 + fxr * m11)
    return _attach_color(rmap, lum, level, valid)
