"""Camera response curve recovery from an exposure bracket.

The curve is the joint least-squares solution of a dense linear system:
one data row per sampled pixel per exposure ties the curve value at the
observed intensity to the unknown log radiance of that pixel, 254 rows
penalize the second difference of the curve (weighted by the hat function
so the extremes float), and one row pins g(128) so the gauge is fixed.
Channels are solved independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import WEIGHT_LUT, Z_MID, ExposureStack, ResponseCurve

#: The curve has 256 unknown values; data must overdetermine them.
_CURVE_SIZE = 256


class UnsolvableSystemError(RuntimeError):
    """The response system is rank-deficient or numerically degenerate."""


@dataclass(frozen=True)
class SolverConfig:
    """Solver knobs: smoothness weight, sample count and sampling seed."""

    lambda_: float = 100.0
    sample_count: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.lambda_ > 0) or not math.isfinite(self.lambda_):
            raise ValueError(f"smoothness weight must be positive, got {self.lambda_}")
        if self.sample_count < 1:
            raise ValueError(f"sample count must be at least 1, got {self.sample_count}")


@dataclass(frozen=True)
class SamplePlan:
    """Pixel coordinates (x, y) used to build the solver system."""

    coords: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        coords = tuple((int(x), int(y)) for x, y in self.coords)
        if not coords:
            raise ValueError("sample plan is empty")
        if len(set(coords)) != len(coords):
            raise ValueError("sample plan contains duplicate coordinates")
        for x, y in coords:
            if x < 0 or y < 0:
                raise ValueError(f"negative coordinate ({x}, {y})")
        object.__setattr__(self, "coords", coords)

    def __len__(self) -> int:
        return len(self.coords)


def _check_solvable(n_samples: int, n_exposures: int) -> None:
    if n_samples * (n_exposures - 1) <= _CURVE_SIZE:
        raise ValueError(
            f"system is underdetermined: {n_samples} samples x ({n_exposures} - 1) exposures "
            f"must exceed {_CURVE_SIZE}"
        )


def _grid_shape(width: int, height: int, n: int) -> tuple[int, int]:
    """Pick a cell grid with at least n cells, roughly matching the aspect."""
    gy = max(1, min(height, round(math.sqrt(n * height / width))))
    gx = math.ceil(n / gy)
    if gx > width:
        gx = width
        gy = math.ceil(n / gx)
    if gy > height or gx * gy < n:
        raise ValueError(f"image too small to place {n} distinct samples")
    return gx, gy


def select_samples(stack: ExposureStack, config: SolverConfig) -> SamplePlan:
    """Choose sample locations on a uniform grid over the middle exposure.

    One pixel is taken per grid cell, drawn with the seeded generator from
    the cell's pixels whose mid-exposure value lies well inside [5, 250] on
    every channel; cells without such a pixel fall back to their center.
    Deterministic for a fixed stack, sample count and seed.
    """
    n = config.sample_count
    _check_solvable(n, len(stack))
    w, h = stack.width, stack.height
    if w * h < n:
        raise ValueError(f"image too small to place {n} distinct samples")
    gx, gy = _grid_shape(w, h, n)

    mid = stack.images[len(stack) // 2].data
    good = np.all((mid >= 5) & (mid <= 250), axis=2)

    rng = np.random.default_rng(config.seed)
    cell_ids = [(i * gx * gy) // n for i in range(n)]
    coords = []
    for cid in cell_ids:
        cy, cx = divmod(cid, gx)
        x0, x1 = (cx * w) // gx, ((cx + 1) * w) // gx
        y0, y1 = (cy * h) // gy, ((cy + 1) * h) // gy
        cell_good = np.flatnonzero(good[y0:y1, x0:x1])
        if cell_good.size:
            flat = int(cell_good[rng.integers(cell_good.size)])
            dy, dx = divmod(flat, x1 - x0)
            coords.append((x0 + dx, y0 + dy))
        else:
            coords.append(((x0 + x1 - 1) // 2, (y0 + y1 - 1) // 2))
    return SamplePlan(tuple(coords))


def _solve_channel(z: np.ndarray, log_times: np.ndarray, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Solve one channel; returns the raw curve and the sample log radiances.

    z is an (N, P) uint8 matrix of observed values; the design matrix has
    N*P data rows, one gauge row and 254 smoothness rows over 256 + N
    unknowns, solved by SVD-based least squares.
    """
    n_samples, n_exposures = z.shape
    n_rows = n_samples * n_exposures + 1 + (_CURVE_SIZE - 2)
    n_cols = _CURVE_SIZE + n_samples
    a = np.zeros((n_rows, n_cols))
    b = np.zeros(n_rows)

    k = 0
    for i in range(n_samples):
        for j in range(n_exposures):
            zij = int(z[i, j])
            wij = WEIGHT_LUT[zij]
            a[k, zij] = wij
            a[k, _CURVE_SIZE + i] = -wij
            b[k] = wij * log_times[j]
            k += 1

    a[k, Z_MID] = 1.0
    k += 1

    for zz in range(1, _CURVE_SIZE - 1):
        wz = lam * WEIGHT_LUT[zz]
        a[k, zz - 1] = wz
        a[k, zz] = -2.0 * wz
        a[k, zz + 1] = wz
        k += 1

    x, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < n_cols:
        raise UnsolvableSystemError(
            f"rank-deficient response system (rank {rank} of {n_cols}); "
            "the stack does not constrain the curve"
        )
    if not np.isfinite(x).all():
        raise UnsolvableSystemError("least-squares solve produced non-finite values")
    return x[:_CURVE_SIZE], x[_CURVE_SIZE:]


def _isotonic(y: np.ndarray) -> np.ndarray:
    """Non-decreasing L2 projection by pool-adjacent-violators."""
    vals: list[float] = []
    counts: list[int] = []
    for v in y:
        vals.append(float(v))
        counts.append(1)
        while len(vals) > 1 and vals[-2] > vals[-1]:
            v2, c2 = vals.pop(), counts.pop()
            v1, c1 = vals.pop(), counts.pop()
            vals.append((v1 * c1 + v2 * c2) / (c1 + c2))
            counts.append(c1 + c2)
    return np.repeat(vals, counts)


def solve_response(stack: ExposureStack, plan: SamplePlan, config: SolverConfig) -> ResponseCurve:
    """Recover the per-channel response curve from a sampled exposure stack.

    The raw least-squares solution gets its endpoints re-extrapolated from
    their neighbors (they carry no data or smoothness weight), is projected
    to a non-decreasing curve, and is re-pinned so g(128) is exactly zero.
    """
    if len(stack) < 2:
        raise ValueError("response solving requires at least two exposures")
    _check_solvable(len(plan), len(stack))
    w, h = stack.width, stack.height
    for x, y in plan.coords:
        if x >= w or y >= h:
            raise ValueError(f"sample ({x}, {y}) outside the {w}x{h} image")

    xs = np.array([c[0] for c in plan.coords])
    ys = np.array([c[1] for c in plan.coords])
    z = np.stack([img.data[ys, xs] for img in stack.images], axis=1)  # (N, P, 3)
    log_times = stack.log_times()

    curves = np.empty((_CURVE_SIZE, 3))
    for c in range(3):
        g, _ = _solve_channel(z[:, :, c], log_times, config.lambda_)
        g[0] = 2.0 * g[1] - g[2]
        g[-1] = 2.0 * g[-2] - g[-3]
        g = _isotonic(g)
        curves[:, c] = g - g[Z_MID]
    return ResponseCurve(curves)


# ---------------------------------------------------------------------------
# Curve persistence: text table "z g_R g_G g_B", one line per pixel value.


def write_curve(curve: ResponseCurve, path) -> None:
    """Write a response curve as a 256-line text table at 9 significant digits."""
    lines = []
    for z in range(_CURVE_SIZE):
        r, g, b = curve.values[z]
        lines.append(f"{z} {r:.9g} {g:.9g} {b:.9g}\n")
    with open(path, "w", encoding="ascii") as f:
        f.writelines(lines)


def read_curve(path) -> ResponseCurve:
    """Read a response curve written by :func:`write_curve`."""
    values = np.zeros((_CURVE_SIZE, 3))
    with open(path, "r", encoding="ascii") as f:
        rows = f.read().splitlines()
    if len(rows) != _CURVE_SIZE:
        raise ValueError(f"curve table must have {_CURVE_SIZE} lines, got {len(rows)}")
    for i, row in enumerate(rows):
        parts = row.split()
        if len(parts) != 4:
            raise ValueError(f"line {i + 1}: expected 'z g_R g_G g_B', got {row!r}")
        try:
            z = int(parts[0])
            vals = [float(p) for p in parts[1:]]
        except ValueError:
            raise ValueError(f"line {i + 1}: non-numeric field in {row!r}") from None
        if z != i:
            raise ValueError(f"line {i + 1}: pixel value {z} out of order")
        values[i] = vals
    return ResponseCurve(values)
