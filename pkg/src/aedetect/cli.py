"""``aedetect`` command line: synth, detect, evaluate, bench.

Exit codes: 0 success, 2 usage or out-of-range setting, 3 file I/O or
format error, 4 degenerate input (too short, silent, nothing to score).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import aic_ratio, envelope, stalta_ratio
from .evaluation import (CampaignSpec, GroundTruth, UndefinedMetricError, error_stats,
                         match_events, quality_metrics, run_campaign)
from .events import METHODS, events_to_csv, events_to_json, read_events
from .presets import PRESETS
from .shorttime import WindowSpec, ste, stzcr
from .signals import (FORMATS, SampledSignal, SignalFormatError, load_signal, read_truth,
                      save_signal, write_truth)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DEGENERATE = 0, 2, 3, 4
SEED_ENV = "AEDETECT_SEED"
EXT = {"wav16": ".wav", "csv": ".csv", "raw": ".f32"}


class UsageError(Exception):
    pass


class DegenerateInput(Exception):
    pass


def us_to_samples(us: float, fs: float) -> int:
    """Microseconds to samples, rounding half up."""
    return int(math.floor(us * 1e-6 * fs + 0.5))


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}")


def _plain(o):
    if dataclasses.is_dataclass(o):
        return {k: _plain(v) for k, v in dataclasses.asdict(o).items()}
    if isinstance(o, dict):
        return {k: _plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_plain(v) for v in o]
    if isinstance(o, float) and math.isinf(o):
        return "inf" if o > 0 else "-inf"
    if isinstance(o, Path):
        return str(o)
    return o


def manifest(args, config=None) -> dict:
    skip = {"func"}
    return {
        "command": args.command,
        "version": __version__,
        "args": _plain({k: v for k, v in vars(args).items() if k not in skip}),
        "config": _plain(config) if config is not None else None,
    }


# -- configuration from flags ----------------------------------------------

def _check_pos(name: str, value, allow_zero: bool = False):
    if value is None:
        return
    if value < 0 or (value == 0 and not allow_zero):
        raise UsageError(f"--{name} must be {'>= 0' if allow_zero else '> 0'}, got {value}")


def build_config(args, fs: float):
    """Preset for the method, overridden by any flags given."""
    base = PRESETS[args.preset](fs)[args.method]
    us = (lambda v: None if v is None else v * 1e-6)
    for name in ("itu", "threshold", "detrigger", "sta_us", "lta_us", "hdt_us", "hlt_us",
                 "early_noise_us", "pre_us", "post_us", "window1_us", "window2_us"):
        _check_pos(name.replace("_", "-"), getattr(args, name, None),
                   allow_zero=name in ("hdt_us", "hlt_us", "pre_us", "post_us"))
    if args.izct_pct is not None and not 0 < args.izct_pct <= 100:
        raise UsageError("--izct-pct must lie in (0, 100]")
    if args.alpha is not None and args.alpha < 0:
        raise UsageError("--alpha must be >= 0")
    over = {}
    if args.method == "ste-zcr":
        win = base.window
        if args.sta_us is not None or args.window is not None or args.hop is not None:
            length = win.length if args.sta_us is None else max(us_to_samples(args.sta_us, fs), 1)
            win = WindowSpec(args.window or win.family, length, args.hop or win.hop)
        over = dict(itu=args.itu, alpha=args.alpha, early_noise_span=us(args.early_noise_us),
                    min_event_span=us(args.min_event_us), window=win)
        if args.izct_pct is not None:
            over.update(izct=args.izct_pct / 100.0, izct_mode="percent")
        if args.izct_abs is not None:
            over.update(izct=args.izct_abs, izct_mode="absolute")
    elif args.method == "ia":
        over = dict(threshold=args.threshold, hdt=us(args.hdt_us), hlt=us(args.hlt_us))
    elif args.method == "sta-lta":
        over = dict(trigger=args.threshold, detrigger=args.detrigger, sta_span=us(args.sta_us),
                    lta_span=us(args.lta_us), pre_event=us(args.pre_us), post_event=us(args.post_us))
    else:
        over = dict(coarse_threshold=args.threshold, hdt=us(args.hdt_us), hlt=us(args.hlt_us),
                    weighting_r=args.r_weight, end_delay1=us(args.end_delay1_us),
                    end_delay2=us(args.end_delay2_us), start_delay2=us(args.start_delay2_us),
                    window1_span=us(args.window1_us), window2_span=us(args.window2_us),
                    cf_sta_span=us(args.sta_us), cf_lta_span=us(args.lta_us))
    over = {k: v for k, v in over.items() if v is not None}
    try:
        return dataclasses.replace(base, **over)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _read(path, args) -> SampledSignal:
    try:
        return load_signal(path, args.format, args.sample_rate)
    except ValueError as exc:
        if isinstance(exc, SignalFormatError):
            raise
        raise DegenerateInput(f"{path}: {exc}") from exc


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# -- commands ----------------------------------------------------------------

def cmd_synth(args) -> int:
    rounds = [s for s in args.snr if not math.isinf(s)]
    floor = None if args.floor_snr is None or math.isinf(args.floor_snr) else args.floor_snr
    spec = CampaignSpec(n_events=args.events, snr_rounds=(math.inf, *rounds), floor_snr_db=floor,
                        seed=args.seed, sample_rate=args.sample_rate, frame=args.frame_ms * 1e-3,
                        arrival=args.arrival_ms * 1e-3)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    man = manifest(args, {"campaign": {k: v for k, v in dataclasses.asdict(spec).items()
                                       if k != "configs"}})
    ext = EXT[args.format]
    for i in range(spec.n_events):
        for snr in spec.snr_rounds:
            sig, truth = spec.frame_signal(i, snr)
            tag = "clean" if math.isinf(snr) else f"snr{snr:g}"
            save_signal(sig, out / f"ev{i:04d}_{tag}{ext}", args.format)
        write_truth(out / f"ev{i:04d}.truth.csv", truth)
    _write(out / "manifest.json", json.dumps(man, indent=2) + "\n")
    print(f"wrote {spec.n_events * len(spec.snr_rounds)} signal files to {out}")
    return EXIT_OK


def _dump_cf(sig: SampledSignal, cfg, method: str, stem: str, out: Path, man: dict):
    header = "# manifest: " + json.dumps(man, sort_keys=True) + "\n"
    fs = sig.sample_rate
    if method == "ste-zcr":
        e = ste(sig, cfg.window)
        z = stzcr(sig, cfg.zwin)
        rows = np.column_stack([np.arange(len(e)), e.sample_index(np.arange(len(e))),
                                e.values, e.values / fs])
        _save_rows(out / f"{stem}.ste.csv", header, "index,sample,ste_v2_samples,ste_v2_s", rows)
        rows = np.column_stack([np.arange(len(z)), z.sample_index(np.arange(len(z))), z.values])
        _save_rows(out / f"{stem}.stzcr.csv", header, "index,sample,stzcr", rows)
        return
    cf = {"ia": lambda: envelope(sig), "sta-lta": lambda: stalta_ratio(sig, cfg),
          "aic": lambda: aic_ratio(sig, cfg)}[method]()
    rows = np.column_stack([np.arange(len(cf)), cf.values])
    _save_rows(out / f"{stem}.{cf.kind.lower()}.csv", header, "index,value", rows)


def _save_rows(path: Path, header: str, cols: str, rows: np.ndarray):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(header)
        np.savetxt(fh, rows, delimiter=",", header=cols, comments="", fmt="%.17g")


def cmd_detect(args) -> int:
    from .evaluation import detector_for

    inputs = [Path(p) for p in args.inputs]
    if args.output and len(inputs) > 1:
        raise UsageError("-o/--output takes a single input; use --out-dir for several")
    for path in inputs:
        sig = _read(path, args)
        cfg = build_config(args, sig.sample_rate)
        man = manifest(args, cfg)
        man["input"] = str(path)
        try:
            events = detector_for(args.method, cfg)(sig)
        except ValueError as exc:
            raise DegenerateInput(f"{path}: {exc}") from exc
        fmt = args.out_format
        text = (events_to_json(events, sig.sample_rate, args.method, man) if fmt == "json"
                else events_to_csv(events, sig.sample_rate, args.method, man))
        if args.output:
            _write(Path(args.output), text)
        elif args.out_dir:
            _write(Path(args.out_dir) / f"{path.stem}.{args.method}.{fmt}", text)
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
        if args.dump_cf:
            _dump_cf(sig, cfg, args.method, path.stem, Path(args.dump_cf), man)
    return EXIT_OK


def _metrics_dict(counts):
    try:
        return dataclasses.asdict(quality_metrics(counts))
    except UndefinedMetricError as exc:
        return {"undefined": str(exc)}


def cmd_evaluate(args) -> int:
    man = manifest(args)
    if args.counts:
        try:
            tp, fp, fn = (int(v) for v in args.counts.split(","))
        except ValueError:
            raise UsageError("--counts expects TP,FP,FN")
        from .evaluation import ConfusionCounts
        try:
            c = ConfusionCounts(tp, fp, fn)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        try:
            m = quality_metrics(c)
        except UndefinedMetricError as exc:
            raise DegenerateInput(str(exc)) from exc
        doc = {"manifest": man, "counts": dataclasses.asdict(c), "metrics": dataclasses.asdict(m)}
        return _emit(args, json.dumps(doc, indent=2))

    if args.campaign:
        methods = tuple(args.methods.split(","))
        if any(m not in METHODS for m in methods):
            raise UsageError(f"--methods must be drawn from {METHODS}")
        floor = None if args.floor_snr is None or math.isinf(args.floor_snr) else args.floor_snr
        spec = CampaignSpec(methods=methods, n_events=args.events, snr_rounds=tuple(args.snr),
                            floor_snr_db=floor, seed=args.seed, noise_frames=args.noise_frames,
                            min_overlap=args.min_overlap)
        report = run_campaign(spec, workers=args.workers)
        man["campaign"] = _plain({k: v for k, v in dataclasses.asdict(spec).items() if k != "configs"})
        if args.out_format == "csv":
            return _emit(args, report.to_csv(man))
        return _emit(args, report.to_json(man, timings=not args.no_timings))

    if not args.detected or not args.truth:
        raise UsageError("evaluate needs --detected and --truth, --counts, or --campaign")
    if len(args.detected) != len(args.truth):
        raise UsageError("--detected and --truth must list the same number of files")
    from .evaluation import ConfusionCounts
    total = ConfusionCounts(0, 0, 0)
    pairs = []
    rate = None
    for dpath, tpath in zip(args.detected, args.truth):
        events, rate, _ = read_events(Path(dpath).read_text())
        truth = GroundTruth(tuple(read_truth(tpath)))
        res = match_events(events, truth, rate, args.min_overlap)
        total = total + res.counts
        pairs.extend(res.pairs)
    errs = None
    if pairs:
        e = error_stats(pairs, rate)
        errs = {k: (v * 1e6 if isinstance(v, float) else v)
                for k, v in dataclasses.asdict(e).items()}
    doc = {"manifest": man, "counts": dataclasses.asdict(total),
           "metrics": _metrics_dict(total), "errors_us": errs}
    return _emit(args, json.dumps(doc, indent=2))


def _emit(args, text: str) -> int:
    if getattr(args, "output", None):
        _write(Path(args.output), text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK


def bench_frame(n_samples: int, seed: int, sample_rate: float = 5e6) -> tuple[SampledSignal, int]:
    """A long frame of back-to-back synthetic bursts at the 27 dB floor.

    Returns the frame and the number of bursts whose arrival lies inside it.
    """
    seg = int(math.floor(45e-3 * sample_rate + 0.5))
    k = -(-n_samples // seg)
    spec = CampaignSpec(n_events=k, seed=seed, sample_rate=sample_rate)
    x = np.concatenate([spec.frame_signal(i, math.inf)[0].samples for i in range(k)])[:n_samples]
    arrival = int(math.floor(spec.arrival * sample_rate + 0.5))
    n_bursts = sum(1 for i in range(k) if i * seg + arrival < n_samples)
    return SampledSignal(x, sample_rate), n_bursts


def cmd_bench(args) -> int:
    from .evaluation import detector_for

    methods = args.methods.split(",")
    if any(m not in METHODS for m in methods):
        raise UsageError(f"--methods must be drawn from {METHODS}")
    sig, n_bursts = bench_frame(int(args.samples), args.seed)
    rows = []
    for m in methods:
        cfg = PRESETS["pencil-lead"](sig.sample_rate)[m]
        det = detector_for(m, cfg)
        runs = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            events = det(sig)
            runs.append(time.perf_counter() - t0)
        best = min(runs)
        rows.append({"method": m, "samples": len(sig), "seconds": runs, "best_s": best,
                     "samples_per_s": len(sig) / best, "events_detected": len(events),
                     "bursts": n_bursts, "time_per_burst_s": best / max(n_bursts, 1)})
    ref = min(r["best_s"] for r in rows)
    for r in rows:
        r["relative_cost"] = r["best_s"] / ref
    doc = {"manifest": manifest(args), "results": rows}
    return _emit(args, json.dumps(doc, indent=2))


# -- parser --------------------------------------------------------------------

def _detector_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("detector settings (override the preset)")
    g.add_argument("--preset", choices=sorted(PRESETS), default="pencil-lead")
    g.add_argument("--itu", type=float, help="STE-ZCR upper energy threshold, V^2 per window sample")
    g.add_argument("--izct-pct", type=float, help="STE-ZCR ZCR threshold, percent of the noise level")
    g.add_argument("--izct-abs", type=float, help="STE-ZCR ZCR threshold as an additive offset")
    g.add_argument("--alpha", type=float, help="noise std weight")
    g.add_argument("--early-noise-us", type=float)
    g.add_argument("--min-event-us", type=float)
    g.add_argument("--window", choices=["hamming", "hann", "rect"])
    g.add_argument("--hop", type=int)
    g.add_argument("--sta-us", type=float, help="STE-ZCR window length, or STA span")
    g.add_argument("--lta-us", type=float)
    g.add_argument("--threshold", type=float, help="fixed threshold level (ia, sta-lta, aic)")
    g.add_argument("--detrigger", type=float)
    g.add_argument("--pre-us", type=float)
    g.add_argument("--post-us", type=float)
    g.add_argument("--hdt-us", type=float)
    g.add_argument("--hlt-us", type=float)
    g.add_argument("--r-weight", type=float)
    g.add_argument("--end-delay1-us", type=float)
    g.add_argument("--end-delay2-us", type=float)
    g.add_argument("--start-delay2-us", type=float)
    g.add_argument("--window1-us", type=float)
    g.add_argument("--window2-us", type=float)


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aedetect", description="Acoustic-emission hit detection")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic burst campaign")
    p.add_argument("--out", required=True)
    p.add_argument("--events", type=int, default=100)
    p.add_argument("--snr", type=_floats, default=[math.inf],
                   help="comma-separated extra SNR rounds in dB; 'inf' for none")
    p.add_argument("--floor-snr", type=float, default=27.0,
                   help="noise floor of the clean record in dB ('inf' for noiseless)")
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--sample-rate", type=float, default=5e6)
    p.add_argument("--frame-ms", type=float, default=45.0)
    p.add_argument("--arrival-ms", type=float, default=5.0)
    p.add_argument("--format", choices=FORMATS, default="raw")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="detect hits in waveform files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--method", choices=METHODS, default="ste-zcr")
    p.add_argument("--format", choices=FORMATS, default="raw")
    p.add_argument("--sample-rate", type=float, help="overrides the .rate sidecar")
    p.add_argument("-o", "--output")
    p.add_argument("--out-dir")
    p.add_argument("--out-format", choices=["json", "csv"], default="json")
    p.add_argument("--dump-cf", metavar="DIR", help="also write the characteristic functions as CSV")
    _detector_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score detections against ground truth")
    p.add_argument("--detected", nargs="+")
    p.add_argument("--truth", nargs="+")
    p.add_argument("--counts", help="TP,FP,FN: print the quality metrics only")
    p.add_argument("--campaign", action="store_true", help="run a synthetic campaign end to end")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--events", type=int, default=100)
    p.add_argument("--noise-frames", type=int, default=0)
    p.add_argument("--snr", type=_floats, default=[math.inf, 20.0, 15.0, 10.0])
    p.add_argument("--floor-snr", type=float, default=27.0)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--min-overlap", type=float, default=0.0)
    p.add_argument("--out-format", choices=["json", "csv"], default="json")
    p.add_argument("--no-timings", action="store_true", help="omit wall-clock fields")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time the detectors on one long frame")
    p.add_argument("--samples", type=float, default=25e6)
    p.add_argument("--methods", default="ste-zcr")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    try:
        parser = build_parser(_default_seed())
    except UsageError as exc:
        print(f"aedetect: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        if args.command == "evaluate" and args.min_overlap is not None and not 0 <= args.min_overlap <= 1:
            raise UsageError("--min-overlap must lie in [0, 1]")
        return args.func(args)
    except UsageError as exc:
        print(f"aedetect: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateInput as exc:
        print(f"aedetect: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OSError, SignalFormatError) as exc:
        print(f"aedetect: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"aedetect: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
