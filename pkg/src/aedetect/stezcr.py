"""STE-ZCR activity detector.

Hits are opened on the short-time energy (STE), their onsets refined
backwards on the STE derivative, their high-energy core closed where the STE
decays to 36.8 % of the core maximum, and their end found forward on the
short-time zero-crossing rate (STZCR). Thresholds are re-adapted to the
background noise measured between consecutive hits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._scan import first_index as _first, first_run as _first_run, last_index as _last
from .events import AeEvent
from .shorttime import NoiseStats, WindowSpec, estimate_noise, ste, ste_derivative, stzcr
from .signals import SampledSignal

# first-order time-constant fraction used for the core end
ITL_FRACTION = 0.368


@dataclass(frozen=True)
class StezcrConfig:
    """Detector settings.

    ``itu`` is an energy per window sample (V^2): the detector compares it
    against ``STE / N``, so internally the preset becomes ``itu * N`` in the
    V^2 * samples unit of :func:`~aedetect.shorttime.ste`. This keeps one
    preset valid across window lengths.
    ``izct`` is a fraction of the STZCR noise level in ``"percent"`` mode and
    an additive STZCR offset in ``"absolute"`` mode. Spans are in seconds.
    The defaults are the Hsu-Nielsen calibration at 5 MHz (20 us Hamming).
    """

    itu: float = 2e-4
    izct: float = 0.70
    izct_mode: str = "percent"
    alpha: float = 4.0
    early_noise_span: float = 2e-3
    window: WindowSpec = field(default_factory=lambda: WindowSpec("hamming", 100, 1))
    zcr_window: WindowSpec | None = None
    min_event_span: float = 0.0

    def __post_init__(self):
        if not self.itu > 0:
            raise ValueError("itu must be positive")
        if self.izct_mode not in ("percent", "absolute"):
            raise ValueError(f"izct_mode must be 'percent' or 'absolute', got {self.izct_mode!r}")
        if self.izct_mode == "percent" and not 0 < self.izct <= 1:
            raise ValueError("percent-mode izct must lie in (0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.min_event_span < 0:
            raise ValueError("min_event_span must be >= 0")
        if self.zcr_window is not None and self.zcr_window.hop != self.window.hop:
            raise ValueError("STE and STZCR windows must share the hop")

    @property
    def zwin(self) -> WindowSpec:
        return self.zcr_window or self.window

    def itu_internal(self) -> float:
        """ITU preset in the STE series unit (V^2 * samples)."""
        return self.itu * self.window.length

    def noise_span(self, sample_rate: float) -> int:
        """Early-noise span in series samples."""
        return int(math.floor(self.early_noise_span * sample_rate / self.window.hop + 0.5))


def adjust_itu(preset: float, noise: NoiseStats) -> float:
    return preset + noise.level


def adjust_izct(izct: float, mode: str, noise: NoiseStats) -> float:
    if mode == "percent":
        return izct * noise.level
    return izct + noise.level


def compute_itl(max_core: float) -> float:
    if not max_core > 0:
        raise ValueError(f"core maximum must be positive, got {max_core}")
    return ITL_FRACTION * max_core


@dataclass
class _Hit:
    onset: int        # series index
    core_end: int     # series index
    endpoint: int     # sample index
    truncated: bool


def detect(sig: SampledSignal, cfg: StezcrConfig | None = None, trace: list | None = None) -> list[AeEvent]:
    """Detect AE hits with the STE-ZCR state machine.

    If ``trace`` is a list, one dict per hit is appended with the thresholds
    and intermediate indices (series positions) used to find it.
    """
    cfg = cfg or StezcrConfig()
    win, zwin = cfg.window, cfg.zwin
    hop = win.hop
    fs = sig.sample_rate
    span = cfg.noise_span(fs)
    if span < 2:
        raise ValueError("early noise span is shorter than two series samples")
    start = max(win.first_full(), zwin.first_full())
    n = -(-len(sig) // hop)
    if start + span > n:
        raise ValueError("signal is shorter than the analysis window plus the early noise span")

    e_ser = ste(sig, win)
    E = e_ser.values
    D = ste_derivative(e_ser).values
    Z = stzcr(sig, zwin).values

    ne = estimate_noise(E, start, span, cfg.alpha)
    nz = estimate_noise(Z, start, span, cfg.alpha)
    itu = cfg.itu_internal()
    itu_adj = adjust_itu(itu, ne)
    izct_adj = adjust_izct(cfg.izct, cfg.izct_mode, nz)
    rearm = ITL_FRACTION * itu
    settle = -(-win.length // hop)
    last = len(sig) - 1

    hits: list[_Hit] = []
    pos, floor = start, 0
    while pos < n:
        p = _first(E, pos, lambda v: v >= itu_adj)
        if p is None:
            break
        o = _last(D, p, floor, lambda v: v <= 0)
        truncated = o is None
        if o is None:
            o = floor

        if hits:
            prev = hits[-1]
            if o * hop <= prev.endpoint:
                prev.endpoint = o * hop - 1
                prev.truncated = True
            else:
                seg0 = prev.endpoint // hop + 1
                if o - seg0 >= 2:
                    ne = estimate_noise(E, seg0, o - seg0, cfg.alpha)
                    nz = estimate_noise(Z, seg0, o - seg0, cfg.alpha)
                    itu_adj = adjust_itu(itu, ne)
                    izct_adj = adjust_izct(cfg.izct, cfg.izct_mode, nz)

        q = _first(E, p + 1, lambda v: v < itu)
        m = p + int(np.argmax(E[p:(n if q is None else q)]))
        itl = compute_itl(E[m])
        c = _first(E, m + 1, lambda v: v <= itl)
        if c is None:
            c, truncated = n - 1, True
        if c <= o:
            break  # degenerate hit squeezed against the frame end
        ep = _first(Z, c, lambda v: v >= izct_adj)
        if ep is None:
            ep, truncated = n - 1, True
        hits.append(_Hit(o, c, min(ep * hop, last), truncated))
        if trace is not None:
            trace.append({
                "itu_adjust": itu_adj, "izct_adjust": izct_adj,
                "noise_ste": ne, "noise_stzcr": nz,
                "provisional_onset": p, "onset": o, "provisional_core_end": q,
                "max_core": m, "itl": itl, "core_end": c, "endpoint": ep,
            })

        # A new hit may only open once the energy has stayed at the background
        # mean (or the ITL fraction of the preset, if higher) for a full window.
        level = max(rearm, ne.mean)
        r = _first_run(E, c + 1, lambda v: v <= level, settle)
        if r is None:
            break
        pos, floor = r, c + 1

    min_span = cfg.min_event_span * fs
    return [AeEvent(h.onset * hop, h.endpoint, h.core_end * hop, h.truncated)
            for h in hits if h.endpoint - h.onset * hop >= min_span]
