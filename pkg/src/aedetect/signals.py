"""Sampled waveforms: representation, file ingestion, band-pass conditioning,
synthetic AE bursts and calibrated white-noise injection."""

from __future__ import annotations

import csv
import math
import warnings
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import signal as sps

FORMATS = ("wav16", "csv", "raw")

# wav16 full scale maps to +/-1 V
WAV_FULL_SCALE = 32768.0


class SignalFormatError(ValueError):
    """A waveform file could not be parsed under its declared format."""


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Uniformly sampled real waveform in volts."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64, copy=True).ravel()
        if x.size == 0:
            raise ValueError("signal has no samples")
        if not np.all(np.isfinite(x)):
            raise ValueError("signal contains NaN or Inf")
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        x.flags.writeable = False
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate

    def power(self) -> float:
        return float(np.mean(self.samples ** 2))

    def to_samples(self, seconds: float) -> int:
        """Seconds to a whole sample count, rounding half up."""
        return seconds_to_samples(seconds, self.sample_rate)

    def slice(self, start: int, stop: int) -> "SampledSignal":
        return SampledSignal(self.samples[start:stop], self.sample_rate)


def seconds_to_samples(seconds: float, sample_rate: float) -> int:
    return int(math.floor(seconds * sample_rate + 0.5))


@dataclass(frozen=True)
class AeSourceParams:
    """Damped-sinusoid burst ``A exp(-(t-T)/gamma) sin(2 pi v0 (t-T))``."""

    amplitude: float      # volts
    arrival: float        # seconds
    decay: float          # seconds, time constant gamma
    frequency: float      # Hz, resonant frequency v0
    duration: float       # seconds, frame length

    def __post_init__(self):
        if self.arrival < 0:
            raise ValueError("arrival must be >= 0")
        if not self.decay > 0:
            raise ValueError("decay must be > 0")
        if not self.frequency > 0:
            raise ValueError("frequency must be > 0")
        if not self.duration > self.arrival:
            raise ValueError("duration must exceed arrival")
        if self.arrival + 5 * self.decay > self.duration:
            warnings.warn(
                "burst is not contained in the frame (arrival + 5*decay > duration)",
                stacklevel=3,
            )

    def envelope(self, t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t >= self.arrival,
                        self.amplitude * np.exp(-(t - self.arrival) / self.decay), 0.0)

    def truth_interval(self, decays: float = 5.0) -> tuple[float, float]:
        """Onset and endpoint of the burst in seconds; endpoint after ``decays`` time constants."""
        return self.arrival, min(self.arrival + decays * self.decay, self.duration)


@dataclass(frozen=True)
class BandpassSpec:
    low_cut: float
    high_cut: float
    transition_width: float
    stopband_attenuation: float = 60.0   # dB
    passband_ripple: float = 0.1         # dB

    def validate(self, sample_rate: float) -> None:
        nyq = sample_rate / 2
        if not 0 < self.low_cut < self.high_cut < nyq:
            raise ValueError(
                f"need 0 < low_cut < high_cut < {nyq:g} Hz, "
                f"got {self.low_cut:g}..{self.high_cut:g}")
        if self.transition_width <= 0:
            raise ValueError("transition_width must be positive")
        if self.low_cut - self.transition_width <= 0:
            raise ValueError("low_cut - transition_width must be above DC")
        if self.high_cut + self.transition_width >= nyq:
            raise ValueError("high_cut + transition_width must be below Nyquist")


def synth_ae(params: AeSourceParams, sample_rate: float) -> SampledSignal:
    n = seconds_to_samples(params.duration, sample_rate)
    t = np.arange(n) / sample_rate
    u = np.zeros(n)
    on = t >= params.arrival
    tau = t[on] - params.arrival
    u[on] = (params.amplitude * np.exp(-tau / params.decay)
             * np.sin(2 * np.pi * params.frequency * tau))
    return SampledSignal(u, sample_rate)


def noise_std_for_snr(signal_power: float, snr_db: float) -> float:
    return math.sqrt(signal_power / 10 ** (snr_db / 10))


def add_awgn(sig: SampledSignal, snr_db: float, seed: int) -> SampledSignal:
    """Add white Gaussian noise so that ``10 log10(P_signal / P_noise) = snr_db``.

    The signal power is taken over the whole frame. ``snr_db = inf`` disables
    the noise and returns the input unchanged.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return sig
    p = sig.power()
    if p == 0:
        raise ValueError("cannot set an SNR on a zero-power signal")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(sig)) * noise_std_for_snr(p, snr_db)
    return SampledSignal(sig.samples + noise, sig.sample_rate)


def design_bandpass(spec: BandpassSpec, sample_rate: float) -> np.ndarray:
    """Equiripple linear-phase band-pass taps (odd length, type I)."""
    spec.validate(sample_rate)
    dp = (10 ** (spec.passband_ripple / 20) - 1) / (10 ** (spec.passband_ripple / 20) + 1)
    ds = 10 ** (-spec.stopband_attenuation / 20)
    df = spec.transition_width / sample_rate
    # Kaiser's length estimate for equiripple designs
    n = int(math.ceil((-20 * math.log10(math.sqrt(dp * ds)) - 13) / (14.6 * df))) + 1
    n += 1 - n % 2
    bands = [0, spec.low_cut - spec.transition_width, spec.low_cut, spec.high_cut,
             spec.high_cut + spec.transition_width, sample_rate / 2]
    return sps.remez(n, bands, [0, 1, 0], weight=[1 / ds, 1 / dp, 1 / ds],
                     fs=sample_rate, maxiter=100)


def bandpass(sig: SampledSignal, spec: BandpassSpec, taps: np.ndarray | None = None) -> SampledSignal:
    """Apply the equiripple band-pass with its group delay removed.

    The output keeps the input length and time alignment: the full
    convolution is cut ``(len(taps) - 1) / 2`` samples in.
    """
    if taps is None:
        taps = design_bandpass(spec, sig.sample_rate)
    else:
        spec.validate(sig.sample_rate)
    delay = (len(taps) - 1) // 2
    y = sps.oaconvolve(sig.samples, taps, mode="full")
    return SampledSignal(y[delay:delay + len(sig)], sig.sample_rate)


# -- file formats ---------------------------------------------------------

def rate_sidecar(path) -> Path:
    return Path(str(path) + ".rate")


def read_rate_sidecar(path) -> float:
    side = rate_sidecar(path)
    try:
        text = side.read_text().strip()
    except OSError as exc:
        raise SignalFormatError(f"missing sample-rate sidecar {side}") from exc
    try:
        rate = float(text)
    except ValueError as exc:
        raise SignalFormatError(f"sidecar {side} does not hold a number: {text!r}") from exc
    if not rate > 0:
        raise SignalFormatError(f"sidecar {side} holds a non-positive rate")
    return rate


def load_signal(path, format: str, sample_rate: float | None = None) -> SampledSignal:
    """Read a waveform file.

    ``wav16`` takes its rate from the header. ``csv`` (amplitudes separated by
    commas or newlines) and ``raw`` (little-endian float32) take it from
    ``sample_rate`` or from the ``<path>.rate`` sidecar.
    """
    path = Path(path)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    if not path.is_file():
        raise FileNotFoundError(path)
    if format == "wav16":
        try:
            with wave.open(str(path), "rb") as w:
                if w.getnchannels() != 1:
                    raise SignalFormatError(f"{path}: expected mono, got {w.getnchannels()} channels")
                if w.getsampwidth() != 2:
                    raise SignalFormatError(f"{path}: expected 16-bit PCM")
                rate = w.getframerate()
                frames = w.readframes(w.getnframes())
        except wave.Error as exc:
            raise SignalFormatError(f"{path}: {exc}") from exc
        x = np.frombuffer(frames, dtype="<i2").astype(np.float64) / WAV_FULL_SCALE
        return SampledSignal(x, rate)

    rate = sample_rate if sample_rate is not None else read_rate_sidecar(path)
    if format == "csv":
        values = []
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                for cell in row:
                    cell = cell.strip()
                    if not cell:
                        continue
                    try:
                        values.append(float(cell))
                    except ValueError as exc:
                        raise SignalFormatError(
                            f"{path}:{lineno}: non-numeric cell {cell!r}") from exc
        x = np.asarray(values)
    else:
        raw = path.read_bytes()
        if len(raw) % 4:
            raise SignalFormatError(f"{path}: size {len(raw)} is not a multiple of 4 bytes")
        x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    return SampledSignal(x, rate)


def save_signal(sig: SampledSignal, path, format: str) -> None:
    """Write a waveform; csv and raw also get the ``.rate`` sidecar."""
    path = Path(path)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    if format == "wav16":
        rate = int(round(sig.sample_rate))
        if rate != sig.sample_rate:
            raise ValueError("wav16 needs an integer sample rate")
        pcm = np.clip(np.round(sig.samples * WAV_FULL_SCALE), -32768, 32767).astype("<i2")
        with wave.open(str(path), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(rate)
            w.writeframes(pcm.tobytes())
        return
    if format == "csv":
        np.savetxt(path, sig.samples, fmt="%.17g")
    else:
        path.write_bytes(sig.samples.astype("<f4").tobytes())
    rate_sidecar(path).write_text(f"{sig.sample_rate:.17g}\n")


def write_truth(path, intervals) -> None:
    """Ground-truth sidecar: one ``onset_s,endpoint_s`` row per event."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["onset_s", "endpoint_s"])
        for onset, end in intervals:
            w.writerow([repr(float(onset)), repr(float(end))])


def read_truth(path) -> list[tuple[float, float]]:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise SignalFormatError(f"{path}: bad truth row {row}")
                # header line
    return rows


__all__ = [
    "SampledSignal", "AeSourceParams", "BandpassSpec", "SignalFormatError",
    "synth_ae", "add_awgn", "bandpass", "design_bandpass", "load_signal", "save_signal",
    "read_truth", "write_truth", "seconds_to_samples", "noise_std_for_snr", "FORMATS",
]
