"""Published calibrations for the four detectors.

``pencil_lead`` holds the values used on artificial (pencil-lead break)
sources, ``field`` the more sensitive set for tensile-test recordings. Window
lengths depend on the sample rate, so both are functions of it.
"""

from __future__ import annotations

from .baselines import AicConfig, IaConfig, StaLtaConfig
from .shorttime import WindowSpec
from .signals import seconds_to_samples
from .stezcr import StezcrConfig


def _hamming(span: float, fs: float) -> WindowSpec:
    return WindowSpec("hamming", max(seconds_to_samples(span, fs), 2), 1)


def pencil_lead(sample_rate: float = 5e6) -> dict:
    return {
        "ste-zcr": StezcrConfig(itu=2e-4, izct=0.70, izct_mode="percent", alpha=4.0,
                                early_noise_span=2e-3, window=_hamming(20e-6, sample_rate)),
        "ia": IaConfig(threshold=3e-3, hdt=1e-3, hlt=10e-3),
        "sta-lta": StaLtaConfig(trigger=5e-4, detrigger=9e-5, sta_span=75e-6, lta_span=1.0,
                                pre_event=15e-6, post_event=10e-3),
        "aic": AicConfig(coarse_threshold=0.2, hdt=100e-6, hlt=10e-3, weighting_r=4.0,
                         end_delay1=25e-6, end_delay2=10e-6, start_delay2=100e-6),
    }


def field(sample_rate: float = 10e6) -> dict:
    return {
        "ste-zcr": StezcrConfig(itu=55e-6, izct=0.80, izct_mode="percent", alpha=1.0,
                                early_noise_span=5e-6, window=_hamming(15e-6, sample_rate)),
        "ia": IaConfig(threshold=2.25e-3, hdt=100e-6, hlt=15e-6),
        "sta-lta": StaLtaConfig(trigger=4e-3, detrigger=3e-3, sta_span=25e-6, lta_span=10e-3,
                                pre_event=1e-6, post_event=0.5e-6),
        "aic": AicConfig(coarse_threshold=6e-3, hdt=100e-6, hlt=15e-6, weighting_r=4.0,
                         end_delay1=10e-6, end_delay2=5e-6, start_delay2=20e-6,
                         window1_span=200e-6, window2_span=40e-6,
                         cf_sta_span=25e-6, cf_lta_span=10e-3),
    }


PRESETS = {"pencil-lead": pencil_lead, "field": field}
