"""Acoustic-emission hit detection on short-time energy and zero-crossing rate."""

from .baselines import (AicConfig, IaConfig, StaLtaConfig, aic_detect, aic_pick, envelope,
                        ia_detect, stalta_detect)
from .evaluation import (CampaignSpec, ConfusionCounts, ErrorStats, GroundTruth, QualityMetrics,
                         UndefinedMetricError, error_stats, match_events, quality_metrics,
                         run_campaign)
from .events import METHODS, AeEvent, check_ordered, events_to_csv, events_to_json, read_events
from .presets import field, pencil_lead
from .shorttime import (CharacteristicSeries, NoiseStats, WindowSpec, estimate_noise, ste,
                        ste_derivative, stzcr, zcr_normalize)
from .signals import (AeSourceParams, BandpassSpec, SampledSignal, SignalFormatError, add_awgn,
                      bandpass, design_bandpass, load_signal, save_signal, synth_ae)
from .stezcr import StezcrConfig, adjust_itu, adjust_izct, compute_itl, detect

__version__ = "0.1.0"

__all__ = [
    "AicConfig",
    "IaConfig",
    "StaLtaConfig",
    "aic_detect",
    "aic_pick",
    "envelope",
    "ia_detect",
    "stalta_detect",
    "CampaignSpec",
    "ConfusionCounts",
    "ErrorStats",
    "GroundTruth",
    "QualityMetrics",
    "UndefinedMetricError",
    "error_stats",
    "match_events",
    "quality_metrics",
    "run_campaign",
    "METHODS",
    "AeEvent",
    "check_ordered",
    "events_to_csv",
    "events_to_json",
    "read_events",
    "field",
    "pencil_lead",
    "CharacteristicSeries",
    "NoiseStats",
    "WindowSpec",
    "estimate_noise",
    "ste",
    "ste_derivative",
    "stzcr",
    "zcr_normalize",
    "AeSourceParams",
    "BandpassSpec",
    "SampledSignal",
    "SignalFormatError",
    "add_awgn",
    "bandpass",
    "design_bandpass",
    "load_signal",
    "save_signal",
    "synth_ae",
    "StezcrConfig",
    "adjust_itu",
    "adjust_izct",
    "compute_itl",
    "detect",
]
