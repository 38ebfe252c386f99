"""Command-line entry point for the sky-imager HDR stack.

Exit codes: 0 on success, 1 on usage errors, 2 on data or processing
errors.  Every subcommand is deterministic: identical inputs and flags
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import capture, fusion, glare, imgio, response, thermo, tonemap
from .core import ExposureStack, RadianceMap


class _UsageError(Exception):
    """Bad argument combination detected after parsing."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems by default; the station contract
    # reserves 2 for data errors and 1 for usage.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_times(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise _UsageError(f"malformed --times value {text!r}") from None


def _load_stack(paths, times_text: str) -> ExposureStack:
    times = _parse_times(times_text)
    if len(times) != len(paths):
        raise _UsageError(f"{len(paths)} images but {len(times)} shutter times")
    images = [imgio.read_ldr(p) for p in paths]
    return ExposureStack(images, times)


def _cmd_respond(args) -> int:
    if len(args.images) < 2:
        raise _UsageError("response solving needs at least 2 images")
    stack = _load_stack(args.images, args.times)
    config = response.SolverConfig(lambda_=args.lambda_, sample_count=args.samples,
                                   seed=args.seed)
    plan = response.select_samples(stack, config)
    curve = response.solve_response(stack, plan, config)
    response.write_curve(curve, args.out)
    rows = len(plan) * len(stack) + 1 + 254
    cols = 256 + len(plan)
    print(f"solved {rows}x{cols} system: lambda={args.lambda_:g} samples={len(plan)} "
          f"exposures={len(stack)}")
    print(f"wrote {args.out}")
    return 0


def _cmd_fuse(args) -> int:
    if not args.images:
        raise _UsageError("fuse needs at least 1 image")
    stack = _load_stack(args.images, args.times)
    curve = response.read_curve(args.curve)
    rmap = fusion.fuse(stack, curve)
    imgio.write_radiance(rmap, args.out)
    print(fusion.format_report(fusion.fusion_report(rmap)))
    print(f"wrote {args.out}")
    return 0


def _parse_tiles(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise _UsageError(f"malformed --tiles value {text!r}, expected NXxNY")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise _UsageError(f"malformed --tiles value {text!r}") from None


def _cmd_tonemap(args) -> int:
    rmap = imgio.read_radiance(args.map)
    tiles_x, tiles_y = _parse_tiles(args.tiles)
    config = tonemap.TonemapConfig(tiles_x=tiles_x, tiles_y=tiles_y, clip_limit=args.clip)
    img = tonemap.equalize_adaptive(rmap, config)
    imgio.write_ldr(img, args.out)
    print(f"wrote {args.out}")
    return 0


def _parse_roi(text: str) -> glare.RegionOfInterest:
    parts = text.split(",")
    if len(parts) != 4:
        raise _UsageError(f"malformed --roi value {text!r}, expected x,y,w,h")
    try:
        x, y, w, h = (int(p) for p in parts)
    except ValueError:
        raise _UsageError(f"malformed --roi value {text!r}") from None
    return glare.RegionOfInterest(x, y, w, h)


def _cmd_glare(args) -> int:
    img = imgio.read_ldr(args.image)
    roi = _parse_roi(args.roi)
    report = glare.saturation_report(img, roi, args.threshold)
    print(glare.format_report(report))
    if args.overlay:
        imgio.write_ldr(glare.render_overlay(img, roi, args.threshold), args.overlay)
        print(f"wrote {args.overlay}")
    return 0


def _cmd_thermo_sim(args) -> int:
    plant = thermo.sealed_default() if args.model == "sealed" else thermo.ventilated_default()
    trace = thermo.simulate(plant, thermo.Thresholds(), args.hours * 3600.0)
    thermo.write_trace(trace, args.out)
    print(thermo.format_summary(thermo.analyze_trace(trace)))
    print(f"wrote {args.out}")
    return 0


def _default_scene(width: int = 96, height: int = 96) -> RadianceMap:
    """Built-in sky scene: a bright disk over a radially falling background."""
    yy, xx = np.mgrid[0:height, 0:width]
    r = np.hypot(xx - width / 2.0, yy - height / 2.0)
    log_e = np.where(r <= 6.0, np.log(1500.0), np.log(1500.0) - (r - 6.0) * 0.18)
    log_e = np.maximum(log_e, np.log(1500.0) - np.log(2.0) * 15.0)
    return RadianceMap(np.repeat(log_e[:, :, None], 3, axis=2).astype(np.float32))


def _cmd_station(args) -> int:
    schedule, plan = capture.load_station_config(args.config)
    scene = imgio.read_radiance(args.scene) if args.scene else _default_scene()
    camera = capture.SyntheticCamera(capture.SyntheticCameraConfig(scene=scene,
                                                                   true_gamma=args.gamma))
    sink = capture.DirectorySink(args.out_dir)
    records = capture.run_station(schedule, plan, camera, sink)
    ok = sum(1 for r in records if r.ok)
    print(f"captured {ok} of {len(records)} brackets into {args.out_dir}")
    for record in records:
        if not record.ok:
            print(f"failed bracket at {record.trigger_time.isoformat()}: {record.error}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="skyhdr",
                     description="HDR imaging and station control toolkit for whole-sky imagers")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("respond", parents=[], help="recover the camera response curve",
                       description="Solve the response curve from a bracket of LDR images.")
    p.add_argument("images", nargs="+", help="LDR images, ordered like --times")
    p.add_argument("--times", required=True, help="comma-separated shutter times in seconds")
    p.add_argument("--lambda", dest="lambda_", type=float, default=100.0,
                   help="smoothness weight (default 100)")
    p.add_argument("--samples", type=int, default=256, help="sample count (default 256)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--out", required=True, help="output curve table")
    p.set_defaults(func=_cmd_respond)

    p = sub.add_parser("fuse", help="fuse a bracket into a radiance map",
                       description="Merge LDR exposures into a log-radiance PFM map.")
    p.add_argument("images", nargs="+", help="LDR images, ordered like --times")
    p.add_argument("--times", required=True, help="comma-separated shutter times in seconds")
    p.add_argument("--curve", required=True, help="response curve table")
    p.add_argument("--out", required=True, help="output PFM map")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("tonemap", help="tone-map a radiance map to 8-bit",
                       description="Adaptive histogram equalization of a radiance map.")
    p.add_argument("map", help="input PFM map")
    p.add_argument("--tiles", default="8x8", help="tile grid, e.g. 8x8 (default)")
    p.add_argument("--clip", type=float, default=0.01,
                   help="histogram clip fraction per tile (default 0.01)")
    p.add_argument("--out", required=True, help="output image (.ppm or .png)")
    p.set_defaults(func=_cmd_tonemap)

    p = sub.add_parser("glare", help="measure circumsolar saturation",
                       description="Count saturated pixels inside a region of interest.")
    p.add_argument("image", help="input image")
    p.add_argument("--roi", required=True, help="region as x,y,w,h")
    p.add_argument("--threshold", type=int, default=glare.DEFAULT_THRESHOLD,
                   help="saturation threshold (default 250)")
    p.add_argument("--overlay", help="optional overlay output image")
    p.set_defaults(func=_cmd_glare)

    p = sub.add_parser("thermo-sim", help="simulate the station thermal plant",
                       description="Run the hysteresis-controlled thermal simulation.")
    p.add_argument("--model", choices=["sealed", "ventilated"], required=True)
    p.add_argument("--hours", type=float, default=24.0, help="simulated duration (default 24)")
    p.add_argument("--out", required=True, help="output trace CSV")
    p.set_defaults(func=_cmd_thermo_sim)

    p = sub.add_parser("station", help="run the capture station loop",
                       description="Capture brackets on a schedule using the synthetic camera.")
    p.add_argument("--config", required=True, help="flat key=value station config")
    p.add_argument("--scene", help="ground-truth radiance PFM (default: built-in scene)")
    p.add_argument("--gamma", type=float, default=2.2, help="synthetic camera gamma (default 2.2)")
    p.add_argument("--out-dir", default="captures", help="capture directory (default ./captures)")
    p.set_defaults(func=_cmd_station)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"skyhdr {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, imgio.ImageFormatError,
            response.UnsolvableSystemError) as exc:
        print(f"skyhdr {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
