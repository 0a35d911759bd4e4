"""Short-time characteristic functions: energy, zero-crossing rate, energy
derivative, and background-noise statistics over a quiet stretch.

All series are causal and left zero-extended: value ``k`` summarises the
``N`` samples ending at sample ``k * hop``, with samples before the frame
start taken as zero. Series length is therefore ``ceil(L / hop)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import SampledSignal

WINDOW_FAMILIES = ("rectangular", "hamming", "hann")
_ALIASES = {"rect": "rectangular", "hanning": "hann"}


@dataclass(frozen=True)
class WindowSpec:
    family: str = "hamming"
    length: int = 100
    hop: int = 1

    def __post_init__(self):
        fam = _ALIASES.get(self.family, self.family)
        if fam not in WINDOW_FAMILIES:
            raise ValueError(f"unknown window family {self.family!r}")
        object.__setattr__(self, "family", fam)
        if self.length < 1:
            raise ValueError("window length must be >= 1")
        if self.hop < 1:
            raise ValueError("hop must be >= 1")
        if self.length > 1 and self.hop >= self.length:
            raise ValueError("hop must be smaller than the window length")

    def weights(self) -> np.ndarray:
        """Window weights ``w(0..N-1)``; not normalised (Hamming is 0.54/0.46)."""
        n = self.length
        if self.family == "rectangular" or n == 1:
            return np.ones(n)
        k = np.arange(n)
        c = np.cos(2 * np.pi * k / (n - 1))
        if self.family == "hamming":
            return 0.54 - 0.46 * c
        return 0.5 - 0.5 * c

    def check(self, n_samples: int) -> None:
        if self.length > n_samples:
            raise ValueError(f"window of {self.length} samples is longer than "
                             f"the signal ({n_samples} samples)")

    def first_full(self) -> int:
        """First series index whose window lies entirely inside the frame."""
        return -(-(self.length - 1) // self.hop)


@dataclass(frozen=True, eq=False)
class CharacteristicSeries:
    values: np.ndarray
    kind: str           # STE | STZCR | STE_DERIV | ENVELOPE | RATIO
    hop: int = 1
    origin_offset: int = 0

    def __len__(self):
        return self.values.size

    def sample_index(self, i):
        """Source-signal sample index of series position ``i``."""
        return self.origin_offset + np.asarray(i) * self.hop


@dataclass(frozen=True)
class NoiseStats:
    mean: float
    std: float
    alpha: float

    @property
    def level(self) -> float:
        return self.mean + self.alpha * self.std


def _causal_filter(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    # y[n] = sum_k v[n-k] w[k], v[<0] = 0
    return np.convolve(v, w)[: v.size]


def ste(sig: SampledSignal, win: WindowSpec, method: str = "direct") -> CharacteristicSeries:
    """Short-time energy ``E[n] = sum_m x(m)^2 w(n - m)`` in V^2 * samples.

    ``method="sliding"`` uses an O(L) running sum and is only available for
    the rectangular window.
    """
    x = sig.samples
    win.check(x.size)
    x2 = x * x
    if method == "sliding":
        if win.family != "rectangular":
            raise ValueError("the sliding-sum path needs a rectangular window")
        c = np.concatenate(([0.0], np.cumsum(x2)))
        idx = np.arange(1, x.size + 1)
        e = c[idx] - c[np.maximum(idx - win.length, 0)]
        np.maximum(e, 0.0, out=e)
    elif method == "direct":
        e = _causal_filter(x2, win.weights())
    else:
        raise ValueError(f"unknown method {method!r}")
    return CharacteristicSeries(e[:: win.hop].copy(), "STE", win.hop)


def ste_derivative(series: CharacteristicSeries) -> CharacteristicSeries:
    """Backward first difference, ``d[0] = 0``."""
    if series.kind != "STE":
        raise ValueError(f"expected an STE series, got {series.kind}")
    if len(series) < 2:
        raise ValueError("need at least two STE values")
    d = np.empty_like(series.values)
    d[0] = 0.0
    np.subtract(series.values[1:], series.values[:-1], out=d[1:])
    return CharacteristicSeries(d, "STE_DERIV", series.hop, series.origin_offset)


def crossings(x: np.ndarray) -> np.ndarray:
    """Per-sample crossing indicator ``|sgn x[m] - sgn x[m-1]| / 2``; sgn(0) = +1, x[-1] = 0."""
    neg = x < 0
    c = np.empty(x.size)
    c[0] = neg[0]
    np.not_equal(neg[1:], neg[:-1], out=c[1:])
    return c


def stzcr(sig: SampledSignal, win: WindowSpec) -> CharacteristicSeries:
    """Short-time zero-crossing rate per sample, in [0, 1]."""
    x = sig.samples
    win.check(x.size)
    z = _causal_filter(crossings(x), win.weights()) / win.length
    np.clip(z, 0.0, 1.0, out=z)
    return CharacteristicSeries(z[:: win.hop].copy(), "STZCR", win.hop)


def zcr_normalize(z, interval: float, sample_rate: float):
    """Crossings per interval of ``M = interval * sample_rate`` samples."""
    if not interval > 0:
        raise ValueError("interval must be positive")
    m = interval * sample_rate
    return m * z if np.isscalar(z) else m * np.asarray(z)


def estimate_noise(series, start: int, span: int, alpha: float) -> NoiseStats:
    """Population mean and std of ``series[start:start+span]``."""
    v = series.values if isinstance(series, CharacteristicSeries) else np.asarray(series)
    if span < 2:
        raise ValueError("noise span must cover at least two values")
    if start < 0 or start + span > v.size:
        raise ValueError(f"noise slice [{start}, {start + span}) outside series of length {v.size}")
    seg = v[start:start + span]
    return NoiseStats(float(seg.mean()), float(seg.std()), float(alpha))
