"""HDR imaging, capture control and thermal simulation for whole-sky imagers."""

from .core import (
    FLAG_OVER,
    FLAG_UNDER,
    FLAG_VALID,
    ExposureStack,
    RadianceMap,
    RasterImage8,
    ResponseCurve,
    hat_weight,
    shutter_time_for_ev,
)
from .response import SamplePlan, SolverConfig, UnsolvableSystemError, select_samples, solve_response
from .fusion import FusionReport, fuse, fusion_report
from .tonemap import TonemapConfig, equalize_adaptive, equalize_global
from .glare import GlareReport, RegionOfInterest, render_overlay, saturation_report
from .capture import (
    BracketPlan,
    CaptureSchedule,
    SyntheticCamera,
    SyntheticCameraConfig,
    plan_bracket,
    run_station,
    schedule_triggers,
    synth_capture,
)
from .thermo import PlantConfig, Thresholds, analyze_trace, controller_step, simulate

__version__ = "0.1.0"

__all__ = [
    "FLAG_OVER",
    "FLAG_UNDER",
    "FLAG_VALID",
    "ExposureStack",
    "RadianceMap",
    "RasterImage8",
    "ResponseCurve",
    "hat_weight",
    "shutter_time_for_ev",
    "SamplePlan",
    "SolverConfig",
    "UnsolvableSystemError",
    "select_samples",
    "solve_response",
    "FusionReport",
    "fuse",
    "fusion_report",
    "TonemapConfig",
    "equalize_adaptive",
    "equalize_global",
    "GlareReport",
    "RegionOfInterest",
    "render_overlay",
    "saturation_report",
    "BracketPlan",
    "CaptureSchedule",
    "SyntheticCamera",
    "SyntheticCameraConfig",
    "plan_bracket",
    "run_station",
    "schedule_triggers",
    "synth_capture",
    "PlantConfig",
    "Thresholds",
    "analyze_trace",
    "controller_step",
    "simulate",
    "__version__",
]
