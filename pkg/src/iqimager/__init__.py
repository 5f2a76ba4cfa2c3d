"""FMCW coherent imaging with a photonic IQ receiver and a row-column readout array."""

__version__ = "0.1.0"

from .array import ArrayConfig, ReadoutSchedule, build_readout_schedule, interconnect_count, readout_frame
from .dsp import (
    DepthMap,
    RangeEstimate,
    Spectrum,
    accuracy_report,
    beat_spectrum,
    build_depth_map,
    estimate_beat_frequency,
    range_from_beat,
    window,
)
from .estimators import BeatFrequencyEstimator, IQImbalanceCorrector, RangeEstimator
from .exceptions import AnalysisError, ConfigurationError, FrameError, ReportError
from .laser import ChirpConfig, PhaseNoiseConfig, PhaseNoisePath, chirp_phase, chirp_slope, phase_noise_path
from .receiver import (
    HybridConfig,
    NoiseConfig,
    balanced_detect,
    hybrid_outputs,
    image_rejection_ratio,
    simulate_pixel,
    simulate_pixel_beat,
)
from .scene import Scene, Target, beat_frequency, round_trip_delay, scene_response
from .traces import IqTrace

__all__ = [
    "AnalysisError", "ArrayConfig", "BeatFrequencyEstimator", "ChirpConfig", "ConfigurationError", "DepthMap",
    "FrameError", "HybridConfig", "IQImbalanceCorrector", "IqTrace", "NoiseConfig", "PhaseNoiseConfig",
    "PhaseNoisePath", "RangeEstimate", "RangeEstimator", "ReadoutSchedule", "ReportError", "Scene", "Spectrum",
    "Target", "accuracy_report", "balanced_detect", "beat_frequency", "beat_spectrum", "build_depth_map",
    "build_readout_schedule", "chirp_phase", "chirp_slope", "estimate_beat_frequency", "hybrid_outputs",
    "image_rejection_ratio", "interconnect_count", "phase_noise_path", "range_from_beat", "readout_frame",
    "round_trip_delay", "scene_response", "simulate_pixel", "simulate_pixel_beat", "window",
]
