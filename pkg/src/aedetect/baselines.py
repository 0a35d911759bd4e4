"""Comparison detectors: instantaneous-amplitude thresholding, STA/LTA and a
two-step AIC picker. All return :class:`~aedetect.events.AeEvent` lists with
the same ordering contract as the STE-ZCR detector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from ._scan import first_index, first_run
from .events import AeEvent
from .shorttime import CharacteristicSeries
from .signals import SampledSignal, seconds_to_samples

AIC_VAR_FLOOR = 1e-20


@dataclass(frozen=True)
class IaConfig:
    threshold: float = 3e-3   # volts
    hdt: float = 1e-3         # seconds
    hlt: float = 10e-3        # seconds

    def __post_init__(self):
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if self.hdt < 0 or self.hlt < 0:
            raise ValueError("hdt and hlt must be >= 0")


@dataclass(frozen=True)
class StaLtaConfig:
    trigger: float = 5e-4
    detrigger: float = 9e-5
    sta_span: float = 75e-6
    lta_span: float = 1.0
    pre_event: float = 15e-6
    post_event: float = 10e-3

    def __post_init__(self):
        if not 0 < self.sta_span < self.lta_span:
            raise ValueError("need 0 < sta_span < lta_span")
        if not 0 < self.detrigger <= self.trigger:
            raise ValueError("need 0 < detrigger <= trigger")
        if self.pre_event < 0 or self.post_event < 0:
            raise ValueError("pre/post event times must be >= 0")


@dataclass(frozen=True)
class AicConfig:
    """Two-step AIC picker settings.

    The coarse characteristic function is the STA/LTA ratio of
    ``x^2 + weighting_r * (dx)^2`` over ``cf_sta_span`` / ``cf_lta_span``.
    Window 1 spans ``window1_span`` before the coarse trigger up to
    ``end_delay1`` after it; window 2 spans ``start_delay2`` before the first
    pick up to ``end_delay2`` after it, capped at ``window2_span``.
    """

    coarse_threshold: float = 0.2
    window1_span: float = 1e-3
    window2_span: float = 200e-6
    start_delay2: float = 100e-6
    end_delay1: float = 25e-6
    end_delay2: float = 10e-6
    weighting_r: float = 4.0
    hdt: float = 100e-6
    hlt: float = 10e-3
    cf_sta_span: float = 75e-6
    cf_lta_span: float = 1.0

    def __post_init__(self):
        if not self.coarse_threshold > 0:
            raise ValueError("coarse_threshold must be positive")
        if not (self.window1_span > 0 and self.window2_span > 0):
            raise ValueError("window spans must be positive")
        if self.window2_span > self.window1_span:
            raise ValueError("window2_span must not exceed window1_span")
        for name in ("start_delay2", "end_delay1", "end_delay2", "hdt", "hlt"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.weighting_r < 0:
            raise ValueError("weighting_r must be >= 0")
        if not 0 < self.cf_sta_span < self.cf_lta_span:
            raise ValueError("need 0 < cf_sta_span < cf_lta_span")


# -- shared pieces ----------------------------------------------------------

def envelope(sig: SampledSignal) -> CharacteristicSeries:
    """Instantaneous amplitude: magnitude of the analytic signal."""
    if len(sig) < 8:
        raise ValueError("envelope needs at least 8 samples")
    env = np.abs(sps.hilbert(sig.samples))
    return CharacteristicSeries(env, "ENVELOPE")


def _timer_hits(cf: np.ndarray, threshold: float, hdt: int, hlt: int):
    """Threshold/timer hits on a CF.

    A hit opens at the first ``cf >= threshold``, stays open across
    below-threshold gaps shorter than ``hdt`` samples and ends at the last
    above-threshold sample before the first gap of ``hdt`` samples. Nothing
    opens during ``hlt`` samples after that gap closes the hit. Yields
    ``(onset, endpoint, truncated, trigger)``.
    """
    gap = max(hdt, 1)
    pos = 0
    while pos < cf.size:
        on = first_index(cf, pos, lambda v: v >= threshold)
        if on is None:
            return
        r = first_run(cf, on + 1, lambda v: v < threshold, gap)
        if r is None:
            # frame ends before the gap could close the hit
            above = np.flatnonzero(cf[on:] >= threshold)
            yield on, on + int(above[-1]), True, on
            return
        yield on, r - gap, False, on
        pos = r + 1 + hlt


def moving_ratio(y: np.ndarray, sta: int, lta: int) -> np.ndarray:
    """Causal ratio of short to long moving averages of a non-negative series.

    Both averages expand over the samples available during warm-up, so the
    ratio is defined from the first sample on; a zero long-term average gives
    a zero ratio.
    """
    c = np.concatenate(([0.0], np.cumsum(y)))
    n = np.arange(1, y.size + 1)
    s = (c[n] - c[np.maximum(n - sta, 0)]) / np.minimum(n, sta)
    lt = (c[n] - c[np.maximum(n - lta, 0)]) / np.minimum(n, lta)
    np.maximum(s, 0.0, out=s)
    np.maximum(lt, 0.0, out=lt)
    out = np.zeros_like(s)
    np.divide(s, lt, out=out, where=lt > 0)
    return out


def _ordered(hits, last: int):
    """Clip overlapping (onset, endpoint, truncated) tuples into AeEvents."""
    events: list[AeEvent] = []
    for on, end, trunc in hits:
        on, end = max(on, 0), min(end, last)
        if events and on <= events[-1].endpoint:
            on, trunc = events[-1].endpoint + 1, True
        if on > end:
            continue
        events.append(AeEvent(int(on), int(end), truncated=bool(trunc)))
    return events


# -- detectors ----------------------------------------------------------------

def ia_detect(sig: SampledSignal, cfg: IaConfig | None = None) -> list[AeEvent]:
    cfg = cfg or IaConfig()
    fs = sig.sample_rate
    env = envelope(sig).values
    hits = _timer_hits(env, cfg.threshold, seconds_to_samples(cfg.hdt, fs),
                       seconds_to_samples(cfg.hlt, fs))
    return _ordered(((on, end, tr) for on, end, tr, _ in hits), len(sig) - 1)


def stalta_ratio(sig: SampledSignal, cfg: StaLtaConfig) -> CharacteristicSeries:
    fs = sig.sample_rate
    x = sig.samples
    r = moving_ratio(x * x, max(seconds_to_samples(cfg.sta_span, fs), 1),
                     max(seconds_to_samples(cfg.lta_span, fs), 1))
    return CharacteristicSeries(r, "RATIO")


def stalta_detect(sig: SampledSignal, cfg: StaLtaConfig | None = None) -> list[AeEvent]:
    """Trigger at ``ratio >= trigger``, release at the first ``ratio < detrigger``.

    The onset is moved ``pre_event`` earlier and the endpoint ``post_event``
    later than the trigger and release samples; both are clamped to the
    frame, which marks the event truncated.
    """
    cfg = cfg or StaLtaConfig()
    fs = sig.sample_rate
    cf = stalta_ratio(sig, cfg).values
    pre = seconds_to_samples(cfg.pre_event, fs)
    post = seconds_to_samples(cfg.post_event, fs)
    last = len(sig) - 1
    events: list[AeEvent] = []
    pos = 0
    while pos <= last:
        t = first_index(cf, pos, lambda v: v >= cfg.trigger)
        if t is None:
            break
        off = first_index(cf, t + 1, lambda v: v < cfg.detrigger)
        trunc = off is None
        end = last if off is None else off - 1 + post
        on = t - pre
        floor = events[-1].endpoint + 1 if events else 0
        if on < floor:
            on, trunc = floor, True
        if end > last:
            end, trunc = last, True
        events.append(AeEvent(int(on), int(end), truncated=trunc))
        # the next onset (trigger - pre) has to land after this endpoint
        pos = max(end + 1 + pre, t + 1)
    return events


def aic_pick(x) -> int:
    """Two-segment variance change point of a slice.

    Minimises ``k ln var(x[:k]) + (L - k - 1) ln var(x[k:])`` over
    ``2 <= k <= L - 2`` and returns ``k``, the first sample of the second
    segment. Variances are floored at 1e-20.
    """
    x = np.asarray(x.samples if isinstance(x, SampledSignal) else x, dtype=np.float64)
    n = x.size
    if n < 8:
        raise ValueError("aic_pick needs at least 8 samples")
    if np.all(x == x[0]):
        raise ValueError("aic_pick on a constant slice is undefined")
    xc = x - x.mean()
    s1 = np.cumsum(xc)
    s2 = np.cumsum(xc * xc)
    k = np.arange(2, n - 1)
    left = s2[k - 1] / k - (s1[k - 1] / k) ** 2
    m = n - k
    r1 = s1[-1] - s1[k - 1]
    r2 = s2[-1] - s2[k - 1]
    right = r2 / m - (r1 / m) ** 2
    aic = (k * np.log(np.maximum(left, AIC_VAR_FLOOR))
           + (n - k - 1) * np.log(np.maximum(right, AIC_VAR_FLOOR)))
    return int(k[np.argmin(aic)])


def allen_cf(sig: SampledSignal, weighting_r: float) -> np.ndarray:
    x = sig.samples
    dx = np.diff(x, prepend=0.0)
    return x * x + weighting_r * dx * dx


def aic_ratio(sig: SampledSignal, cfg: AicConfig) -> CharacteristicSeries:
    fs = sig.sample_rate
    r = moving_ratio(allen_cf(sig, cfg.weighting_r),
                     max(seconds_to_samples(cfg.cf_sta_span, fs), 1),
                     max(seconds_to_samples(cfg.cf_lta_span, fs), 1))
    return CharacteristicSeries(r, "RATIO")


def _pick_in(x: np.ndarray, lo: int, hi: int, fallback: int) -> tuple[int, bool]:
    # inclusive [lo, hi]; too short or flat slices keep the fallback
    if hi - lo + 1 < 8 or np.all(x[lo:hi + 1] == x[lo]):
        return fallback, True
    return lo + aic_pick(x[lo:hi + 1]), False


def aic_detect(sig: SampledSignal, cfg: AicConfig | None = None) -> list[AeEvent]:
    """Coarse CF trigger, then two AIC picks on successively tighter windows.

    The endpoint comes from the threshold/HDT/HLT timer scheme on the same
    CF. A window clipped by the frame edge marks the event truncated.
    """
    cfg = cfg or AicConfig()
    fs = sig.sample_rate
    x = sig.samples
    last = x.size - 1
    cf = aic_ratio(sig, cfg).values
    to = lambda s: seconds_to_samples(s, fs)  # noqa: E731
    w1, w2 = to(cfg.window1_span), to(cfg.window2_span)
    ed1, ed2, sd2 = to(cfg.end_delay1), to(cfg.end_delay2), to(cfg.start_delay2)

    hits = []
    for _, end, trunc, t in _timer_hits(cf, cfg.coarse_threshold, to(cfg.hdt), to(cfg.hlt)):
        lo, hi = t - w1, t + ed1
        trunc |= lo < 0 or hi > last
        p1, flat1 = _pick_in(x, max(lo, 0), min(hi, last), t)
        lo, hi = p1 - sd2, p1 + ed2
        if hi - lo + 1 > w2:
            lo = hi - w2 + 1
        trunc |= lo < 0 or hi > last
        onset, flat2 = _pick_in(x, max(lo, 0), min(hi, last), p1)
        hits.append((onset, max(end, onset), trunc or flat1 or flat2))
    return _ordered(hits, last)


DETECTORS = {"ia": ia_detect, "sta-lta": stalta_detect, "aic": aic_detect}

__all__ = [
    "IaConfig", "StaLtaConfig", "AicConfig", "envelope", "ia_detect", "stalta_ratio",
    "stalta_detect", "aic_pick", "aic_ratio", "aic_detect", "allen_cf", "moving_ratio",
]
