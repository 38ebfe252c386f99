"""Bit-exact readers and writers for the raster and radiance file formats.

Supported formats:

* PPM (``P6``), 8-bit RGB, maxval 255 only.
* PGM (``P5``), 8-bit single channel, maxval 255 only; used for the
  radiance validity masks.
* PFM (``PF``), 32-bit float RGB.  Only the little-endian variant (negative
  scale line) is supported; rows are stored bottom to top per convention.
  The payload holds the map's natural-log radiance values verbatim, so a
  write/read cycle preserves every float bit-exactly.
* PNG, 8-bit RGB truecolor only, delegated to Pillow.

All writers are deterministic: the same input always produces the same
bytes.  Readers raise :class:`ImageFormatError` on anything malformed and
never let parsing errors escape as arbitrary exceptions.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

from .core import FLAG_OVER, FLAG_UNDER, FLAG_VALID, RadianceMap, RasterImage8

_MAX_HEADER_TOKEN = 32
_MAX_HEADER_LINE = 128


class ImageFormatError(Exception):
    """Raised for malformed, truncated or unsupported image files."""


class MissingMaskWarning(UserWarning):
    """A radiance map was loaded without its validity sidecar."""


# ---------------------------------------------------------------------------
# netpbm (PPM / PGM) plumbing


def _read_netpbm_token(f) -> bytes:
    """Read one whitespace-delimited header token, skipping '#' comments."""
    token = b""
    while True:
        c = f.read(1)
        if not c:
            raise ImageFormatError("unexpected end of file in header")
        if c == b"#":
            while c not in (b"\n", b""):
                c = f.read(1)
            continue
        if c.isspace():
            if token:
                return token
            continue
        token += c
        if len(token) > _MAX_HEADER_TOKEN:
            raise ImageFormatError("header token too long")


def _read_netpbm_header(f, magic: bytes) -> tuple[int, int]:
    got = f.read(2)
    if got != magic:
        raise ImageFormatError(f"bad magic {got!r}, expected {magic!r}")
    fields = []
    for name in ("width", "height", "maxval"):
        token = _read_netpbm_token(f)
        try:
            value = int(token)
        except ValueError:
            raise ImageFormatError(f"non-numeric {name} {token!r}") from None
        fields.append(value)
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ImageFormatError(f"degenerate dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"unsupported maxval {maxval} (only 255)")
    # The header ends with exactly one whitespace byte before the payload.
    return width, height


def _read_payload(f, nbytes: int) -> bytes:
    # Check the size on disk first so a lying header cannot force a huge
    # buffer allocation before the shortfall is noticed.
    remaining = os.fstat(f.fileno()).st_size - f.tell()
    if remaining < nbytes:
        raise ImageFormatError(f"truncated payload: expected {nbytes} bytes, got {remaining}")
    payload = f.read(nbytes)
    if len(payload) != nbytes:
        raise ImageFormatError(f"truncated payload: expected {nbytes} bytes, got {len(payload)}")
    return payload


def read_ldr(path) -> RasterImage8:
    """Read a PPM (P6), PGM (P5) or PNG file as an 8-bit RGB image.

    Grayscale PGM data is replicated across the three channels.
    """
    path = os.fspath(path)
    if path.lower().endswith(".png"):
        return _read_png(path)
    with open(path, "rb") as f:
        magic = f.read(2)
        f.seek(0)
        if magic == b"P6":
            width, height = _read_netpbm_header(f, b"P6")
            raw = _read_payload(f, width * height * 3)
            arr = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)
        elif magic == b"P5":
            width, height = _read_netpbm_header(f, b"P5")
            raw = _read_payload(f, width * height)
            gray = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
            arr = np.repeat(gray[:, :, None], 3, axis=2)
        else:
            raise ImageFormatError(f"unrecognized magic {magic!r}")
    return RasterImage8(arr)


def write_ldr(img: RasterImage8, path) -> None:
    """Write an image as PPM, PGM or PNG depending on the file extension.

    PGM output requires a grayscale image (all channels equal).
    """
    path = os.fspath(path)
    lower = path.lower()
    if lower.endswith(".ppm"):
        header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
        with open(path, "wb") as f:
            f.write(header)
            f.write(img.data.tobytes())
    elif lower.endswith(".pgm"):
        data = img.data
        if (data[:, :, 0] != data[:, :, 1]).any() or (data[:, :, 0] != data[:, :, 2]).any():
            raise ImageFormatError("PGM output requires a grayscale image")
        write_mask(data[:, :, 0], path)
    elif lower.endswith(".png"):
        _write_png(img, path)
    else:
        raise ImageFormatError(f"unsupported output extension for {path!r}")


def read_mask(path) -> np.ndarray:
    """Read a PGM (P5) file as a (height, width) uint8 array."""
    with open(os.fspath(path), "rb") as f:
        width, height = _read_netpbm_header(f, b"P5")
        raw = _read_payload(f, width * height)
    return np.frombuffer(raw, dtype=np.uint8).reshape(height, width).copy()


def write_mask(mask: np.ndarray, path) -> None:
    """Write a (height, width) uint8 array as a PGM (P5) file."""
    arr = np.asarray(mask)
    if arr.ndim != 2 or arr.dtype != np.uint8:
        raise ValueError(f"mask must be a 2-d uint8 array, got {arr.dtype} {arr.shape}")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    with open(os.fspath(path), "wb") as f:
        f.write(header)
        f.write(arr.tobytes())


# ---------------------------------------------------------------------------
# PFM radiance maps


def _read_header_line(f) -> bytes:
    line = b""
    while True:
        c = f.read(1)
        if not c:
            raise ImageFormatError("unexpected end of file in header")
        if c == b"\n":
            return line
        line += c
        if len(line) > _MAX_HEADER_LINE:
            raise ImageFormatError("header line too long")


def mask_path(path) -> str:
    """Path of the validity sidecar that accompanies a PFM radiance file."""
    base, _ = os.path.splitext(os.fspath(path))
    return base + ".mask.pgm"


def write_radiance(rmap: RadianceMap, path) -> None:
    """Write a radiance map as little-endian PFM plus a PGM validity sidecar."""
    path = os.fspath(path)
    header = f"PF\n{rmap.width} {rmap.height}\n-1.0\n".encode("ascii")
    payload = np.flipud(rmap.data).astype("<f4").tobytes()
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload)
    write_mask(rmap.flags, mask_path(path))


def read_radiance(path) -> RadianceMap:
    """Read a PFM radiance map and its validity sidecar.

    A missing sidecar is tolerated: the map is treated as all-valid and a
    :class:`MissingMaskWarning` is emitted.
    """
    path = os.fspath(path)
    with open(path, "rb") as f:
        magic = _read_header_line(f)
        if magic == b"Pf":
            raise ImageFormatError("single-channel PFM is not supported")
        if magic != b"PF":
            raise ImageFormatError(f"bad magic {magic!r}, expected b'PF'")
        dims = _read_header_line(f).split()
        if len(dims) != 2:
            raise ImageFormatError(f"malformed dimension line {dims!r}")
        try:
            width, height = int(dims[0]), int(dims[1])
        except ValueError:
            raise ImageFormatError(f"non-numeric dimensions {dims!r}") from None
        if width < 1 or height < 1:
            raise ImageFormatError(f"degenerate dimensions {width}x{height}")
        try:
            scale = float(_read_header_line(f))
        except ValueError:
            raise ImageFormatError("non-numeric scale line") from None
        if scale >= 0:
            raise ImageFormatError("big-endian PFM (non-negative scale) is not supported")
        raw = _read_payload(f, width * height * 3 * 4)
    data = np.frombuffer(raw, dtype="<f4").reshape(height, width, 3)
    data = np.flipud(data)

    sidecar = mask_path(path)
    if os.path.exists(sidecar):
        flags = read_mask(sidecar)
        if flags.shape != (height, width):
            raise ImageFormatError("validity mask dimensions do not match the map")
        if not np.isin(flags, (FLAG_UNDER, FLAG_OVER, FLAG_VALID)).all():
            raise ImageFormatError("validity mask holds values outside the flag codes")
    else:
        warnings.warn(f"no validity mask beside {path}; assuming all pixels valid",
                      MissingMaskWarning, stacklevel=2)
        flags = None
    try:
        return RadianceMap(data, flags)
    except ValueError as exc:
        raise ImageFormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# PNG via Pillow


def _read_png(path: str) -> RasterImage8:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            if im.format != "PNG":
                raise ImageFormatError(f"not a PNG file: {path!r}")
            if im.mode != "RGB":
                raise ImageFormatError(f"only 8-bit RGB truecolor PNG is supported, got mode {im.mode}")
            arr = np.asarray(im)
    except UnidentifiedImageError:
        raise ImageFormatError(f"unreadable PNG file: {path!r}") from None
    except OSError as exc:
        raise ImageFormatError(f"broken PNG file: {exc}") from None
    return RasterImage8(arr)


def _write_png(img: RasterImage8, path: str) -> None:
    from PIL import Image

    Image.fromarray(img.data, mode="RGB").save(path, format="PNG")
