"""Assemble an HDR radiance map from an exposure stack and a response curve."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FLAG_OVER,
    FLAG_UNDER,
    FLAG_VALID,
    WEIGHT_LUT,
    ExposureStack,
    RadianceMap,
    ResponseCurve,
)


@dataclass(frozen=True)
class FusionReport:
    """Coverage and dynamic-range summary of a fused radiance map."""

    valid_pixel_fraction: float
    dynamic_range_bits: float
    channel_range_bits: tuple[float, float, float]


def fuse(stack: ExposureStack, response: ResponseCurve) -> RadianceMap:
    """Merge an exposure stack into per-pixel log radiance.

    Each channel is the hat-weighted average of g(Z) - ln(dt) over the
    exposures.  Pixels where a channel collects zero total weight (every
    sample saturated) fall back to the closest informative curve value:
    g(254) - ln(dt_min) when saturated high, g(1) - ln(dt_max) when
    saturated low, and the pixel is flagged over- or under-exposed.
    """
    z = np.stack([img.data for img in stack.images])  # (P, h, w, 3)
    log_times = stack.log_times()
    h, w = stack.height, stack.width

    log_e = np.empty((h, w, 3), dtype=np.float64)
    over = np.zeros((h, w), dtype=bool)
    under = np.zeros((h, w), dtype=bool)
    for c in range(3):
        zc = z[:, :, :, c]
        wgt = WEIGHT_LUT[zc]
        g = response.channel(c)[zc]
        num = (wgt * (g - log_times[:, None, None])).sum(axis=0)
        den = wgt.sum(axis=0)

        dead = den == 0.0
        vals = num / np.where(dead, 1.0, den)
        # Zero weight means every sample sits at 0 or 255; a single
        # saturated-high sample marks the channel over-exposed.
        dead_high = dead & (zc == 255).any(axis=0)
        dead_low = dead & ~dead_high
        vals[dead_high] = response.channel(c)[254] - log_times[0]
        vals[dead_low] = response.channel(c)[1] - log_times[-1]
        over |= dead_high
        under |= dead_low
        log_e[:, :, c] = vals

    flags = np.full((h, w), FLAG_VALID, dtype=np.uint8)
    flags[under] = FLAG_UNDER
    flags[over] = FLAG_OVER  # over-exposure wins: it is what the glare metric tracks
    return RadianceMap(log_e.astype(np.float32), flags)


def fusion_report(rmap: RadianceMap) -> FusionReport:
    """Dynamic range in bits over the valid pixels, per channel and overall."""
    valid = rmap.valid_mask()
    n_valid = int(valid.sum())
    if n_valid == 0:
        raise ValueError("radiance map has no valid pixels")
    data = rmap.data[valid].astype(np.float64)  # (n_valid, 3)
    ln2 = math.log(2.0)
    per_channel = tuple(
        float((data[:, c].max() - data[:, c].min()) / ln2) for c in range(3)
    )
    overall = float((data.max() - data.min()) / ln2)
    fraction = n_valid / valid.size
    return FusionReport(fraction, overall, per_channel)


def format_report(report: FusionReport) -> str:
    """Single-line record used by the command-line tools."""
    r, g, b = report.channel_range_bits
    return (
        f"valid_fraction={report.valid_pixel_fraction:.6f} "
        f"dynamic_range_bits={report.dynamic_range_bits:.3f} "
        f"r_bits={r:.3f} g_bits={g:.3f} b_bits={b:.3f}"
    )
