import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
import streams
from aedetect.baselines import (AicConfig, IaConfig, StaLtaConfig, aic_detect, aic_pick, envelope,
                                ia_detect, moving_ratio, stalta_detect, stalta_ratio)
from aedetect.events import check_ordered
from aedetect.signals import AeSourceParams, SampledSignal, add_awgn, synth_ae

FS = 5e6


def tone_burst(t0, dur, amp=1.0, f=200e3, n=None):
    n = n or int(20e-3 * FS)
    x = np.zeros(n)
    i0, i1 = int(t0 * FS), int((t0 + dur) * FS)
    k = np.arange(i1 - i0)
    x[i0:i1] = amp * np.sin(2 * np.pi * f * k / FS)
    return x


# -- envelope ---------------------------------------------------------------------------

def test_envelope_of_tone():
    n = np.arange(20_000)
    x = 0.8 * np.sin(2 * np.pi * 250e3 * n / FS)
    env = envelope(SampledSignal(x, FS)).values
    mid = env[2000:-2000]
    assert np.all(np.abs(mid - 0.8) <= 0.02 * 0.8)
    assert np.all(mid >= np.abs(x[2000:-2000]) - 0.02)


def test_envelope_zero_and_short():
    assert np.all(envelope(SampledSignal(np.zeros(100), FS)).values == 0)
    with pytest.raises(ValueError):
        envelope(SampledSignal(np.ones(7), FS))


def test_envelope_tracks_burst_decay():
    p = AeSourceParams(1.0, 5e-3, 1e-3, 300e3, 45e-3)
    s = synth_ae(p, FS)
    env = envelope(s).values
    t = s.times()
    core = (t > p.arrival + 20e-6) & (t < p.arrival + p.decay)
    ref = p.envelope(t[core])
    assert np.all(np.abs(env[core] - ref) <= 0.05 * ref)


# -- IA -------------------------------------------------------------------------------------

def test_ia_zero():
    assert ia_detect(SampledSignal(np.zeros(10_000), FS)) == []


def test_ia_merges_short_gap():
    cfg = IaConfig(threshold=0.1, hdt=1e-3, hlt=1e-3)
    x = tone_burst(2e-3, 1e-3) + tone_burst(3.5e-3, 1e-3)   # 0.5 ms gap < HDT
    ev = ia_detect(SampledSignal(x, FS), cfg)
    assert len(ev) == 1


def test_ia_splits_long_gap():
    cfg = IaConfig(threshold=0.1, hdt=0.5e-3, hlt=1e-3)
    x = tone_burst(2e-3, 1e-3) + tone_burst(6e-3, 1e-3)     # 3 ms gap > HDT + HLT
    ev = ia_detect(SampledSignal(x, FS), cfg)
    assert len(ev) == 2
    check_ordered(ev)
    for e, t0 in zip(ev, (2e-3, 6e-3)):
        assert abs(e.onset / FS - t0) < 20e-6
        assert abs(e.endpoint / FS - (t0 + 1e-3)) < 20e-6


def test_ia_lockout_suppresses():
    cfg = IaConfig(threshold=0.1, hdt=0.5e-3, hlt=5e-3)
    x = tone_burst(2e-3, 1e-3) + tone_burst(4.5e-3, 1e-3)   # second lands in the lockout
    assert len(ia_detect(SampledSignal(x, FS), cfg)) == 1


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), c=st.sampled_from([0.25, 0.5, 2.0, 8.0]))
def test_ia_joint_scaling(seed, c):
    s = streams.crowded(seed, duration=15e-3)
    cfg = IaConfig(threshold=0.05, hdt=0.2e-3, hlt=0.5e-3)
    a = ia_detect(s, cfg)
    b = ia_detect(SampledSignal(c * s.samples, FS), IaConfig(0.05 * c, cfg.hdt, cfg.hlt))
    assert a == b
    check_ordered(a)


# -- STA/LTA ------------------------------------------------------------------------------------

def test_moving_ratio_matches_loops():
    y = np.random.default_rng(4).random(400)
    np.testing.assert_allclose(moving_ratio(y, 7, 50), oracles.moving_ratio(list(y), 7, 50),
                               rtol=1e-10)


def test_stalta_white_noise_ratio_near_one():
    x = np.random.default_rng(5).standard_normal(200_000)
    cfg = StaLtaConfig(trigger=3.0, detrigger=1.5, sta_span=200e-6, lta_span=10e-3)
    r = stalta_ratio(SampledSignal(x, FS), cfg).values[int(10e-3 * FS):]
    assert abs(np.mean(r) - 1) < 0.02
    assert np.max(r) < 3.0
    assert stalta_detect(SampledSignal(x, FS), cfg) == []


def test_stalta_triggers_within_sta_span():
    x = tone_burst(10e-3, 2e-3, amp=1.0) + np.random.default_rng(0).standard_normal(int(20e-3 * FS)) * 1e-3
    cfg = StaLtaConfig(trigger=4.0, detrigger=2.0, sta_span=75e-6, lta_span=5e-3, pre_event=0, post_event=0)
    ev = stalta_detect(SampledSignal(x, FS), cfg)
    assert len(ev) >= 1
    assert 0 <= ev[0].onset - int(10e-3 * FS) <= int(75e-6 * FS)


def test_stalta_degenerate_runs():
    x = tone_burst(4e-3, 1e-3) + tone_burst(9e-3, 1e-3) + \
        np.random.default_rng(1).standard_normal(int(20e-3 * FS)) * 1e-3
    cfg = StaLtaConfig(trigger=3.0, detrigger=3.0, sta_span=50e-6, lta_span=2e-3, pre_event=0, post_event=0)
    s = SampledSignal(x, FS)
    r = stalta_ratio(s, cfg).values
    above = r >= 3.0
    edges = np.flatnonzero(np.diff(np.concatenate(([0], above.astype(int), [0]))))
    runs = [(a, b - 1) for a, b in zip(edges[::2], edges[1::2])]
    got = [(e.onset, e.endpoint) for e in stalta_detect(s, cfg)]
    assert got == runs


def test_stalta_clamps_and_flags():
    # quiet lead shorter than pre_event, burst ringing past the frame end
    n = int(5e-3 * FS)
    x = tone_burst(50e-6, 1e-3, n=n) + np.random.default_rng(9).standard_normal(n) * 1e-4
    cfg = StaLtaConfig(trigger=2.0, detrigger=1.0, sta_span=20e-6, lta_span=2e-3,
                       pre_event=100e-6, post_event=10e-3)
    ev = stalta_detect(SampledSignal(x, FS), cfg)
    assert ev and ev[0].onset == 0 and ev[0].truncated
    assert ev[-1].endpoint == int(5e-3 * FS) - 1


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), c=st.sampled_from([0.125, 0.5, 4.0, 1024.0]))
def test_stalta_scale_invariant(seed, c):
    s = streams.crowded(seed, duration=15e-3)
    cfg = StaLtaConfig(trigger=3.0, detrigger=1.2, sta_span=50e-6, lta_span=2e-3,
                       pre_event=10e-6, post_event=100e-6)
    a = stalta_detect(s, cfg)
    assert a == stalta_detect(SampledSignal(c * s.samples, FS), cfg)
    check_ordered(a)


def test_stalta_config_checks():
    with pytest.raises(ValueError):
        StaLtaConfig(sta_span=1.0, lta_span=0.5)
    with pytest.raises(ValueError):
        StaLtaConfig(trigger=1.0, detrigger=2.0)


# -- AIC --------------------------------------------------------------------------------------------

def change_point(seed, n=400, c=None, ratio=100.0):
    rng = np.random.default_rng(seed)
    c = c if c is not None else int(rng.integers(n // 5, n - n // 5))
    x = rng.standard_normal(n)
    x[c:] *= math.sqrt(ratio)
    return x, c


@pytest.mark.parametrize("seed", range(20))
def test_aic_pick_finds_change(seed):
    x, c = change_point(seed)
    assert abs(aic_pick(x) - c) <= 3


@pytest.mark.parametrize("seed", range(10))
def test_aic_pick_matches_direct_criterion(seed):
    x, _ = change_point(seed, n=120, ratio=20)
    assert aic_pick(x) == oracles.aic_curve_pick(list(x))


@pytest.mark.parametrize("seed", range(20))
def test_aic_pick_reversal(seed):
    x, _ = change_point(seed)
    k = aic_pick(x)
    assert abs(aic_pick(x[::-1]) - (len(x) - k)) <= 1


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), c=st.floats(1e-3, 1e3))
def test_aic_pick_scale_invariant(seed, c):
    x, _ = change_point(seed, n=200, ratio=50)
    assert aic_pick(c * x) == aic_pick(x) == aic_pick(-x)


def test_aic_pick_degenerate():
    with pytest.raises(ValueError):
        aic_pick(np.full(50, 2.0))
    with pytest.raises(ValueError):
        aic_pick(np.arange(7.0))


def test_aic_detect_clean_burst():
    p = AeSourceParams(1.0, 5e-3, 1e-3, 300e3, 45e-3)
    s = add_awgn(synth_ae(p, FS), 40.0, 3)
    cfg = AicConfig(coarse_threshold=5.0, cf_lta_span=10e-3)
    ev = aic_detect(s, cfg)
    assert len(ev) >= 1
    assert abs(ev[0].onset / FS - p.arrival) <= cfg.window2_span


def test_aic_detect_zero():
    assert aic_detect(SampledSignal(np.zeros(10_000), FS)) == []


def test_aic_detect_edge_truncated():
    # trigger 0.2 ms in: window 1 (1 ms before the trigger) is clipped
    x = tone_burst(0.2e-3, 1e-3, n=int(5e-3 * FS)) + \
        np.random.default_rng(2).standard_normal(int(5e-3 * FS)) * 1e-4
    ev = aic_detect(SampledSignal(x, FS), AicConfig(coarse_threshold=3.0, cf_lta_span=2e-3))
    assert ev and ev[0].truncated


def test_aic_config_checks():
    with pytest.raises(ValueError):
        AicConfig(window1_span=100e-6, window2_span=200e-6)
    with pytest.raises(ValueError):
        AicConfig(hdt=-1)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 1000))
def test_all_baselines_ordered_and_deterministic(seed):
    s = streams.crowded(seed, duration=20e-3)
    for fn, cfg in ((ia_detect, IaConfig(0.05, 0.2e-3, 0.5e-3)),
                    (stalta_detect, StaLtaConfig(3.0, 1.5, 50e-6, 5e-3, 10e-6, 100e-6)),
                    (aic_detect, AicConfig(coarse_threshold=3.0, cf_lta_span=5e-3))):
        a = fn(s, cfg)
        check_ordered(a)
        assert a == fn(s, cfg)
