"""Scoring detections against ground truth, and synthetic noise-round campaigns."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .events import METHODS
from .signals import AeSourceParams, SampledSignal, add_awgn, synth_ae


class UndefinedMetricError(ValueError):
    """A ratio metric has a zero denominator."""


@dataclass(frozen=True)
class GroundTruth:
    """Ordered, non-overlapping ``(onset_s, endpoint_s)`` intervals."""

    events: tuple = ()

    def __post_init__(self):
        evs = tuple((float(a), float(b)) for a, b in self.events)
        for a, b in evs:
            if not b > a:
                raise ValueError(f"truth interval ({a}, {b}) has no extent")
        for (_, b), (a, _) in zip(evs, evs[1:]):
            if not a > b:
                raise ValueError("truth intervals must be ordered and non-overlapping")
        object.__setattr__(self, "events", evs)

    def __len__(self):
        return len(self.events)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total_detected(self) -> int:
        return self.tp + self.fp

    @property
    def total_truth(self) -> int:
        return self.tp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass(frozen=True)
class MatchResult:
    counts: ConfusionCounts
    pairs: tuple  # ((AeEvent, (onset_s, endpoint_s)), ...)


@dataclass(frozen=True)
class QualityMetrics:
    """Detection quality in percent."""

    accuracy: float
    precision: float
    sensitivity: float
    f1: float
    fdr: float
    fnr: float


@dataclass(frozen=True)
class ErrorStats:
    """Signed errors (detected minus truth) in seconds; population std."""

    onset_mean: float
    onset_std: float
    endpoint_mean: float
    endpoint_std: float
    lifespan_mean: float
    lifespan_std: float
    onset_abs_mean: float
    lifespan_abs_mean: float
    n: int


def match_events(detected, truth, sample_rate: float, min_overlap: float = 0.0) -> MatchResult:
    """One-to-one matching of detections to truth intervals, in time order.

    A pair matches when the intervals overlap by a positive amount that is at
    least ``min_overlap`` times the truth length. Both lists are walked
    together; on a mismatch the interval that ends first is dropped, since it
    cannot overlap anything later. Because matched pairs can never cross,
    this yields a maximum matching.
    """
    if not 0 <= min_overlap <= 1:
        raise ValueError("min_overlap must lie in [0, 1]")
    tr = truth.events if isinstance(truth, GroundTruth) else tuple(truth)
    det = list(detected)
    pairs = []
    i = j = 0
    while i < len(det) and j < len(tr):
        d0, d1 = det[i].onset / sample_rate, det[i].endpoint / sample_rate
        t0, t1 = tr[j]
        ov = min(d1, t1) - max(d0, t0)
        if ov > 0 and ov >= min_overlap * (t1 - t0):
            pairs.append((det[i], (t0, t1)))
            i += 1
            j += 1
        elif d1 <= t1:
            i += 1
        else:
            j += 1
    tp = len(pairs)
    return MatchResult(ConfusionCounts(tp, len(det) - tp, len(tr) - tp), tuple(pairs))


def quality_metrics(c: ConfusionCounts) -> QualityMetrics:
    if c.tp + c.fp == 0:
        raise UndefinedMetricError("no detections: precision and FDR are undefined")
    if c.tp + c.fn == 0:
        raise UndefinedMetricError("no truth events: sensitivity and FNR are undefined")
    tp, fp, fn = c.tp, c.fp, c.fn
    return QualityMetrics(
        accuracy=100.0 * tp / (tp + fp + fn),
        precision=100.0 * tp / (tp + fp),
        sensitivity=100.0 * tp / (tp + fn),
        # same as 2PS/(P+S), but stays defined when tp = 0
        f1=100.0 * 2 * tp / (2 * tp + fp + fn),
        fdr=100.0 * fp / (tp + fp),
        fnr=100.0 * fn / (tp + fn),
    )


def pair_errors(pairs, sample_rate: float) -> np.ndarray:
    """Per-pair signed (onset, endpoint, lifespan) errors in seconds."""
    out = np.empty((len(pairs), 3))
    for k, (ev, (t0, t1)) in enumerate(pairs):
        on = ev.onset / sample_rate - t0
        end = ev.endpoint / sample_rate - t1
        out[k] = on, end, end - on
    return out


def error_stats(pairs, sample_rate: float) -> ErrorStats:
    if len(pairs) == 0:
        raise ValueError("error statistics need at least one matched pair")
    e = pair_errors(pairs, sample_rate)
    mean, std = e.mean(axis=0), e.std(axis=0)
    absm = np.abs(e).mean(axis=0)
    return ErrorStats(float(mean[0]), float(std[0]), float(mean[1]), float(std[1]),
                      float(mean[2]), float(std[2]), float(absm[0]), float(absm[2]), len(pairs))


# -- campaigns --------------------------------------------------------------

def round_label(snr_db: float) -> str:
    return "clean" if math.isinf(snr_db) else f"{snr_db:g}"


@dataclass(frozen=True)
class CampaignSpec:
    """Synthetic burst campaign: one burst per frame, several noise rounds.

    The ``inf`` round is the as-generated record, carrying only the
    ``floor_snr_db`` noise floor (``None`` keeps it noiseless). Every finite
    round replaces the floor with noise at that SNR. ``noise_frames`` appends
    burst-free frames of ``noise_std`` white noise to every round, for
    false-alarm measurement. ``configs`` maps method names to detector
    configurations; missing methods use the pencil-lead preset.
    """

    methods: tuple = ("ste-zcr",)
    n_events: int = 100
    snr_rounds: tuple = (math.inf, 20.0, 15.0, 10.0)
    floor_snr_db: float | None = 27.0
    seed: int = 0
    sample_rate: float = 5e6
    frame: float = 45e-3
    arrival: float = 5e-3
    amplitude: tuple = (0.1, 1.0)
    decay: tuple = (0.5e-3, 3e-3)
    frequency: tuple = (100e3, 500e3)
    decays_in_truth: float = 5.0
    noise_frames: int = 0
    noise_std: float = 1e-3
    min_overlap: float = 0.0
    configs: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "snr_rounds", tuple(float(s) for s in self.snr_rounds))
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown method(s) {unknown}; expected {METHODS}")
        if self.n_events < 0 or self.noise_frames < 0:
            raise ValueError("frame counts must be >= 0")
        if self.arrival + self.decays_in_truth * self.decay[1] > self.frame:
            raise ValueError("frame too short for the longest burst")

    def source(self, i: int) -> AeSourceParams:
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0, i]))
        return AeSourceParams(
            amplitude=float(rng.uniform(*self.amplitude)), arrival=self.arrival,
            decay=float(rng.uniform(*self.decay)), frequency=float(rng.uniform(*self.frequency)),
            duration=self.frame)

    def noise_seed(self, i: int, snr_db: float) -> int:
        tag = 0 if math.isinf(snr_db) else int(round(snr_db * 1000)) + 1
        return int(np.random.SeedSequence([self.seed, 1, i, tag]).generate_state(1)[0])

    def frame_signal(self, i: int, snr_db: float) -> tuple[SampledSignal, tuple]:
        """Frame ``i`` of a round and its truth intervals (seconds)."""
        fs = self.sample_rate
        if i >= self.n_events:
            rng = np.random.default_rng(self.noise_seed(i, snr_db))
            n = int(math.floor(self.frame * fs + 0.5))
            return SampledSignal(rng.standard_normal(n) * self.noise_std, fs), ()
        p = self.source(i)
        clean = synth_ae(p, fs)
        level = self.floor_snr_db if math.isinf(snr_db) else snr_db
        sig = clean if level is None else add_awgn(clean, level, self.noise_seed(i, snr_db))
        return sig, (p.truth_interval(self.decays_in_truth),)


@dataclass
class CellReport:
    method: str
    snr_db: float
    counts: ConfusionCounts
    metrics: QualityMetrics | None
    errors: ErrorStats | None
    time_per_event_s: float | None
    time_per_frame_s: float
    n_frames: int
    onset_at_zero: int
    events: list = field(default_factory=list, repr=False)  # per-frame detections

    def as_dict(self, timings: bool = True) -> dict:
        d = {
            "method": self.method, "snr_db": self.snr_db, "n_frames": self.n_frames,
            "tp": self.counts.tp, "fp": self.counts.fp, "fn": self.counts.fn,
            "metrics": None if self.metrics is None else asdict(self.metrics),
            "errors": None if self.errors is None else asdict(self.errors),
            "onset_at_zero": self.onset_at_zero,
        }
        if timings:
            d["time_per_event_s"] = self.time_per_event_s
            d["time_per_frame_s"] = self.time_per_frame_s
        return d


@dataclass
class CampaignReport:
    spec: CampaignSpec
    cells: dict  # method -> round label -> CellReport

    def cell(self, method: str, snr_db: float) -> CellReport:
        return self.cells[method][round_label(snr_db)]

    def to_dict(self, timings: bool = True) -> dict:
        return {m: {r: c.as_dict(timings) for r, c in rounds.items()}
                for m, rounds in self.cells.items()}

    def to_json(self, manifest: dict | None = None, timings: bool = True) -> str:
        doc = {"manifest": manifest or {}, "report": self.to_dict(timings)}
        return json.dumps(doc, indent=2, default=_json_default)

    def to_csv(self, manifest: dict | None = None) -> str:
        buf = io.StringIO()
        if manifest is not None:
            buf.write("# manifest: " + json.dumps(manifest, sort_keys=True, default=_json_default) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for rounds in self.cells.values():
            for c in rounds.values():
                w.writerow(report_row(c))
        return buf.getvalue()


REPORT_COLUMNS = (
    "method", "snr_db", "tp", "fp", "fn",
    "accuracy_pct", "precision_pct", "sensitivity_pct", "f1_pct", "fdr_pct", "fnr_pct",
    "onset_err_mean_us", "onset_err_std_us", "endpoint_err_mean_us", "endpoint_err_std_us",
    "lifespan_err_mean_us", "lifespan_err_std_us", "time_per_event_s", "time_per_frame_s",
)


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def report_row(c: CellReport) -> list:
    m, e = c.metrics, c.errors
    us = (lambda v: None if e is None else v * 1e6)
    return [
        c.method, "inf" if math.isinf(c.snr_db) else repr(c.snr_db), c.counts.tp, c.counts.fp, c.counts.fn,
        *(_fmt(None if m is None else getattr(m, k))
          for k in ("accuracy", "precision", "sensitivity", "f1", "fdr", "fnr")),
        *(_fmt(us(getattr(e, k) if e is not None else None))
          for k in ("onset_mean", "onset_std", "endpoint_mean", "endpoint_std",
                    "lifespan_mean", "lifespan_std")),
        _fmt(c.time_per_event_s), _fmt(c.time_per_frame_s),
    ]


def _json_default(o):
    if isinstance(o, float) and math.isinf(o):
        return "inf"
    if hasattr(o, "__dataclass_fields__"):
        return asdict(o)
    raise TypeError(f"not serialisable: {type(o).__name__}")


def detector_for(method: str, config=None):
    """Return ``f(signal) -> events`` for a method name."""
    from . import baselines, stezcr

    fns = {"ste-zcr": stezcr.detect, "ia": baselines.ia_detect,
           "sta-lta": baselines.stalta_detect, "aic": baselines.aic_detect}
    if method not in fns:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    fn = fns[method]
    return lambda sig: fn(sig, config)


def run_cell(spec: CampaignSpec, method: str, snr_db: float) -> CellReport:
    from .presets import pencil_lead

    cfg = spec.configs.get(method) or pencil_lead(spec.sample_rate)[method]
    det = detector_for(method, cfg)
    counts = ConfusionCounts(0, 0, 0)
    pairs, per_frame = [], []
    elapsed = 0.0
    at_zero = 0
    n_frames = spec.n_events + spec.noise_frames
    for i in range(n_frames):
        sig, truth = spec.frame_signal(i, snr_db)
        t0 = time.perf_counter()
        evs = det(sig)
        elapsed += time.perf_counter() - t0
        res = match_events(evs, truth, spec.sample_rate, spec.min_overlap)
        counts = counts + res.counts
        pairs.extend(res.pairs)
        per_frame.append(evs)
        at_zero += sum(1 for e in evs if e.onset == 0)
    try:
        metrics = quality_metrics(counts)
    except UndefinedMetricError:
        metrics = None
    errors = error_stats(pairs, spec.sample_rate) if pairs else None
    return CellReport(
        method=method, snr_db=snr_db, counts=counts, metrics=metrics, errors=errors,
        time_per_event_s=elapsed / spec.n_events if spec.n_events else None,
        time_per_frame_s=elapsed / n_frames if n_frames else 0.0,
        n_frames=n_frames, onset_at_zero=at_zero, events=per_frame)


def run_campaign(spec: CampaignSpec, workers: int = 1) -> CampaignReport:
    """Run every method over every round. Results do not depend on ``workers``."""
    jobs = [(m, s) for m in spec.methods for s in spec.snr_rounds]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            done = list(ex.map(lambda job: run_cell(spec, *job), jobs))
    else:
        done = [run_cell(spec, *job) for job in jobs]
    cells: dict = {m: {} for m in spec.methods}
    for (m, s), rep in zip(jobs, done):
        cells[m][round_label(s)] = rep
    return CampaignReport(spec, cells)


__all__ = [
    "GroundTruth", "ConfusionCounts", "MatchResult", "QualityMetrics", "ErrorStats",
    "UndefinedMetricError", "match_events", "quality_metrics", "error_stats", "pair_errors",
    "CampaignSpec", "CampaignReport", "CellReport", "run_campaign", "run_cell",
    "REPORT_COLUMNS", "report_row", "detector_for", "round_label",
]
