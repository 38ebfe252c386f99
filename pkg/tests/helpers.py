"""Shared synthetic scenes and stacks used across the test suite."""

import numpy as np

from skyhdr import ExposureStack, RadianceMap, ResponseCurve, SyntheticCameraConfig, synth_capture

#: The bracket produced by EV offsets {-3, -1, +1} on a 1/250 s base.
BRACKET_TIMES = (1 / 2000, 1 / 500, 1 / 125)


def power_law_curve(gamma: float = 2.2) -> ResponseCurve:
    """The exact response of the synthetic camera, pinned at g(128) = 0.

    This is the independent reference the solver is tested against:
    g(z) = gamma * ln(z / 128).
    """
    z = np.arange(256).astype(np.float64)
    g = gamma * np.log(np.maximum(z, 1.0) / 128.0)
    g[0] = 2.0 * g[1] - g[2]
    g -= g[128]
    return ResponseCurve(np.repeat(g[:, None], 3, axis=1))


def random_scene(lo: float, hi: float, shape=(48, 48), seed: int = 0) -> RadianceMap:
    """Log-uniform random radiance field over [lo, hi]."""
    rng = np.random.default_rng(seed)
    log_e = rng.uniform(np.log(lo), np.log(hi), size=shape + (3,))
    return RadianceMap(log_e.astype(np.float32))


def anchored_scene(seed: int = 0, shape=(48, 48)) -> RadianceMap:
    """Reconstruction-test scene: log-uniform [24, 1600] with dark anchors.

    8% of samples sit in [0.05, 0.4], deep enough that no exposure reaches
    the mid-range band; they anchor the low tail of the response curve
    without themselves entering the relative-error check.
    """
    rng = np.random.default_rng(seed)
    log_e = rng.uniform(np.log(24.0), np.log(1600.0), size=shape + (3,))
    dark = rng.random(shape + (3,)) < 0.08
    log_e[dark] = rng.uniform(np.log(0.05), np.log(0.40), size=int(dark.sum()))
    return RadianceMap(log_e.astype(np.float32))


def ramp_scene(lo: float = 0.05, bits: float = 15.0, size: int = 48) -> RadianceMap:
    """Log-linear ramp spanning exactly 2**bits in radiance."""
    ramp = np.linspace(np.log(lo), np.log(lo * 2.0 ** bits), size * size)
    return RadianceMap(np.repeat(ramp.reshape(size, size, 1), 3, axis=2).astype(np.float32))


def sun_scene(size: int = 96) -> RadianceMap:
    """Radial sun scene for the glare comparison.

    A linear-ramp core (the region a 1/2000 s exposure still saturates)
    surrounded by a steep halo and a slowly falling sky.  The total range
    stays under 6.8 ln units so histogram equalization resolves the core
    across several bins.
    """
    yy, xx = np.mgrid[0:size, 0:size]
    r = np.hypot(xx - size / 2.0, yy - size / 2.0)
    e = np.where(r <= 10.0, 1966.0 - 5.2 * r,
                 np.where(r <= 18.0, 1914.0 * np.exp(-0.35 * (r - 10.0)),
                          1914.0 * np.exp(-0.35 * 8.0) * np.exp(-0.05 * (r - 18.0))))
    log_e = np.log(e)
    return RadianceMap(np.repeat(log_e[:, :, None], 3, axis=2).astype(np.float32))


def capture_stack(scene: RadianceMap, times=BRACKET_TIMES, gamma: float = 2.2) -> ExposureStack:
    config = SyntheticCameraConfig(scene=scene, true_gamma=gamma)
    return ExposureStack([synth_capture(config, t) for t in times], times)


def midrange_mask(stack: ExposureStack, lo: int = 20, hi: int = 235) -> np.ndarray:
    """Per-pixel, per-channel: some exposure lands in [lo, hi]."""
    z = np.stack([img.data for img in stack.images])
    return ((z >= lo) & (z <= hi)).any(axis=0)
