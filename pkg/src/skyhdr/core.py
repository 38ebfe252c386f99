"""Shared domain types for the sky-imager HDR stack.

Everything here is immutable after construction: the backing numpy arrays
are copied in and marked read-only, so instances can be shared freely
between threads.
"""

from __future__ import annotations

import math

import numpy as np

# Validity flag codes for radiance maps.  The values double as the byte
# encoding of the PGM sidecar mask.
FLAG_UNDER = 0
FLAG_OVER = 128
FLAG_VALID = 255

#: Pixel value whose log exposure is pinned to zero in every response curve.
Z_MID = 128

CHANNELS = 3


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


class RasterImage8:
    """An 8-bit RGB raster: a single low-dynamic-range exposure."""

    channels = CHANNELS

    def __init__(self, data) -> None:
        arr = np.asarray(data)
        if arr.ndim != 3 or arr.shape[2] != CHANNELS:
            raise ValueError(f"expected a (height, width, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must contain at least one pixel")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError(f"pixel values must be integers, got dtype {arr.dtype}")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("pixel values outside [0, 255]")
            arr = arr.astype(np.uint8)
        self._data = _frozen(arr)

    @property
    def data(self) -> np.ndarray:
        """Read-only (height, width, 3) uint8 array."""
        return self._data

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def height(self) -> int:
        return self._data.shape[0]

    def __repr__(self) -> str:
        return f"RasterImage8({self.width}x{self.height})"


class ExposureStack:
    """An ordered exposure bracket: images plus their shutter times.

    Shutter times must be positive and strictly increasing; all images must
    share the same dimensions.  A single-image stack is legal (it can be
    fused), but response solving requires at least two exposures.
    """

    def __init__(self, images, shutter_times_s) -> None:
        images = tuple(images)
        times = tuple(float(t) for t in shutter_times_s)
        if not images:
            raise ValueError("exposure stack needs at least one image")
        if len(images) != len(times):
            raise ValueError(f"{len(images)} images but {len(times)} shutter times")
        first = images[0]
        for img in images:
            if not isinstance(img, RasterImage8):
                raise TypeError("stack images must be RasterImage8")
            if (img.width, img.height) != (first.width, first.height):
                raise ValueError("all images in a stack must share dimensions")
        for t in times:
            if not (t > 0) or not math.isfinite(t):
                raise ValueError(f"shutter times must be positive, got {t}")
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise ValueError("shutter times must be strictly increasing")
        self.images = images
        self.shutter_times_s = times

    def __len__(self) -> int:
        return len(self.images)

    @property
    def width(self) -> int:
        return self.images[0].width

    @property
    def height(self) -> int:
        return self.images[0].height

    def log_times(self) -> np.ndarray:
        """Natural-log shutter times as a float64 vector."""
        return np.log(np.array(self.shutter_times_s, dtype=np.float64))

    def __repr__(self) -> str:
        return f"ExposureStack({len(self.images)} x {self.width}x{self.height})"


class ResponseCurve:
    """Per-channel lookup g(z), z in [0, 255], in natural-log exposure units.

    Invariants enforced here: g is non-decreasing on every channel and
    g(128) is exactly zero (the gauge convention shared with the solver).
    """

    def __init__(self, values) -> None:
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (256, CHANNELS):
            raise ValueError(f"expected a (256, 3) array, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("response curve contains non-finite values")
        if not (arr[Z_MID] == 0.0).all():
            raise ValueError("response curve must satisfy g(128) = 0 exactly")
        if (np.diff(arr, axis=0) < 0).any():
            raise ValueError("response curve must be non-decreasing")
        self._values = _frozen(arr)

    @property
    def values(self) -> np.ndarray:
        """Read-only (256, 3) float64 array of log exposures."""
        return self._values

    def channel(self, c: int) -> np.ndarray:
        return self._values[:, c]

    def __repr__(self) -> str:
        v = self._values
        return f"ResponseCurve(span {v.min():.3f}..{v.max():.3f})"


class RadianceMap:
    """Per-pixel natural-log relative radiance with a per-pixel validity flag.

    Values are stored as float32 (the on-disk PFM precision).  Flags use the
    FLAG_* codes; over/under-exposed pixels still carry the finite fallback
    values assigned by fusion, so the map is finite everywhere it is valid.
    """

    channels = CHANNELS

    def __init__(self, log_radiance, flags=None) -> None:
        arr = np.asarray(log_radiance)
        if arr.ndim != 3 or arr.shape[2] != CHANNELS:
            raise ValueError(f"expected a (height, width, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("radiance map must contain at least one pixel")
        arr = arr.astype(np.float32)
        if flags is None:
            flg = np.full(arr.shape[:2], FLAG_VALID, dtype=np.uint8)
        else:
            flg = np.asarray(flags)
            if flg.shape != arr.shape[:2]:
                raise ValueError("flags shape must match the pixel grid")
            if not np.isin(flg, (FLAG_UNDER, FLAG_OVER, FLAG_VALID)).all():
                raise ValueError("flags must use the FLAG_UNDER/FLAG_OVER/FLAG_VALID codes")
            flg = flg.astype(np.uint8)
        if not np.isfinite(arr[flg == FLAG_VALID]).all():
            raise ValueError("valid pixels must hold finite log-radiance values")
        self._data = _frozen(arr)
        self._flags = _frozen(flg)

    @property
    def data(self) -> np.ndarray:
        """Read-only (height, width, 3) float32 array of ln(E)."""
        return self._data

    @property
    def flags(self) -> np.ndarray:
        """Read-only (height, width) uint8 array of FLAG_* codes."""
        return self._flags

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def height(self) -> int:
        return self._data.shape[0]

    def valid_mask(self) -> np.ndarray:
        return self._flags == FLAG_VALID

    def __repr__(self) -> str:
        frac = float(np.mean(self._flags == FLAG_VALID))
        return f"RadianceMap({self.width}x{self.height}, {frac:.1%} valid)"


def hat_weight(z):
    """Hat weighting over pixel values: 0 at the extremes, peaking mid-scale.

    Returns z for z <= 127 and 255 - z for z >= 128, so w(0) = w(255) = 0
    and w(127) = w(128) = 127.  Accepts scalars or integer arrays.
    """
    z_arr = np.asarray(z)
    if (z_arr < 0).any() or (z_arr > 255).any():
        raise ValueError("pixel value outside [0, 255]")
    w = np.where(z_arr <= 127, z_arr, 255 - z_arr)
    if np.isscalar(z) or z_arr.ndim == 0:
        return int(w)
    return w


#: Precomputed hat weights for direct lookup by pixel value.
WEIGHT_LUT = hat_weight(np.arange(256)).astype(np.float64)
WEIGHT_LUT.setflags(write=False)


def shutter_time_for_ev(base_s: float, ev_offset: float) -> float:
    """Shutter time after applying an exposure-value offset in stops.

    One stop doubles the shutter time at fixed aperture.  Integer offsets
    scale by an exact power of two so bracket arithmetic stays lossless.
    """
    base_s = float(base_s)
    if not (base_s > 0) or not math.isfinite(base_s):
        raise ValueError(f"base shutter time must be positive, got {base_s}")
    ev = float(ev_offset)
    if ev.is_integer():
        return math.ldexp(base_s, int(ev))
    return base_s * 2.0 ** ev
