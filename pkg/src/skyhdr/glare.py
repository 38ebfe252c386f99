"""Circumsolar saturation metrics and the pink over-exposure overlay."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RasterImage8

#: Overlay recolor for saturated pixels.
PINK = (255, 105, 180)
WHITE = (255, 255, 255)

DEFAULT_THRESHOLD = 250


@dataclass(frozen=True)
class RegionOfInterest:
    """Axis-aligned pixel rectangle, typically framing the sun."""

    x: int
    y: int
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.x < 0 or self.y < 0:
            raise ValueError(f"region origin must be non-negative, got ({self.x}, {self.y})")
        if self.width < 1 or self.height < 1:
            raise ValueError(f"region must span at least one pixel, got {self.width}x{self.height}")

    def check_inside(self, img: RasterImage8) -> None:
        if self.x + self.width > img.width or self.y + self.height > img.height:
            raise ValueError(
                f"region {self.width}x{self.height}+{self.x}+{self.y} exceeds "
                f"the {img.width}x{img.height} image"
            )


@dataclass(frozen=True)
class GlareReport:
    saturated_count: int
    total_count: int
    saturated_fraction: float


def _saturated(img: RasterImage8, roi: RegionOfInterest, threshold: int) -> np.ndarray:
    if not 1 <= threshold <= 255:
        raise ValueError(f"threshold must be in [1, 255], got {threshold}")
    roi.check_inside(img)
    sub = img.data[roi.y:roi.y + roi.height, roi.x:roi.x + roi.width]
    return sub.max(axis=2) >= threshold


def saturation_report(img: RasterImage8, roi: RegionOfInterest,
                      threshold: int = DEFAULT_THRESHOLD) -> GlareReport:
    """Count pixels whose brightest channel reaches the threshold, inside the region."""
    sat = _saturated(img, roi, threshold)
    count = int(sat.sum())
    total = sat.size
    return GlareReport(count, total, count / total)


def render_overlay(img: RasterImage8, roi: RegionOfInterest,
                   threshold: int = DEFAULT_THRESHOLD) -> RasterImage8:
    """Copy of the image with saturated region pixels pink and the region outlined.

    The 1-pixel white outline sits on the region's own perimeter, so nothing
    outside the region is ever touched.
    """
    sat = _saturated(img, roi, threshold)
    out = img.data.copy()
    view = out[roi.y:roi.y + roi.height, roi.x:roi.x + roi.width]
    view[sat] = PINK
    view[0, :] = WHITE
    view[-1, :] = WHITE
    view[:, 0] = WHITE
    view[:, -1] = WHITE
    return RasterImage8(out)


def format_report(report: GlareReport) -> str:
    """Single-line record used by the command-line tools."""
    return (
        f"saturated={report.saturated_count} total={report.total_count} "
        f"fraction={report.saturated_fraction:.6f}"
    )
