# %% [markdown]
# # Four detectors on one frame
#
# Three bursts with different decay constants, the middle one arriving while
# the first still rings. The baselines run with the pencil-lead presets; their
# fixed thresholds are written for a different amplitude scale, so a second
# set of settings tuned to this frame is shown as well.

# %%
import numpy as np

from aedetect import (AeSourceParams, AicConfig, IaConfig, SampledSignal, StaLtaConfig, aic_detect,
                      detect, ia_detect, stalta_detect, synth_ae)
from aedetect.presets import pencil_lead
from _plot import plt, save

fs, dur = 5e6, 30e-3
bursts = [(0.8, 4e-3, 0.6e-3, 200e3), (0.3, 7.5e-3, 0.4e-3, 350e3), (0.5, 18e-3, 1.5e-3, 150e3)]
x = sum(synth_ae(AeSourceParams(a, t, g, f, dur), fs).samples for a, t, g, f in bursts)
x = x + np.random.default_rng(0).standard_normal(x.size) * 2e-3
sig = SampledSignal(x, fs)
truth = [(t, t + 5 * g) for _, t, g, _ in bursts]
print("truth (ms):", [(round(a * 1e3, 2), round(b * 1e3, 2)) for a, b in truth])


def show(name, events):
    spans = [(round(e.onset / fs * 1e3, 3), round(e.endpoint / fs * 1e3, 3)) for e in events]
    print(f"{name:<22}{len(events)} hits  {spans}")


# %%
pre = pencil_lead(fs)
show("ste-zcr", detect(sig, pre["ste-zcr"]))
show("ia (preset)", ia_detect(sig, pre["ia"]))
show("sta-lta (preset)", stalta_detect(sig, pre["sta-lta"]))
show("aic (preset)", aic_detect(sig, pre["aic"]))

# %%
tuned = {
    "ia (tuned)": (ia_detect, IaConfig(threshold=0.03, hdt=0.2e-3, hlt=0.5e-3)),
    "sta-lta (tuned)": (stalta_detect, StaLtaConfig(trigger=4.0, detrigger=1.5, sta_span=75e-6,
                                                    lta_span=5e-3, pre_event=15e-6, post_event=0.2e-3)),
    "aic (tuned)": (aic_detect, AicConfig(coarse_threshold=4.0, cf_lta_span=5e-3, hdt=0.2e-3, hlt=0.5e-3)),
}
found = {"ste-zcr": detect(sig, pre["ste-zcr"])}
for name, (fn, cfg) in tuned.items():
    found[name] = fn(sig, cfg)
    show(name, found[name])

# %%
if plt:
    tm = sig.times() * 1e3
    fig, ax = plt.subplots(len(found) + 1, 1, figsize=(8, 8), sharex=True)
    ax[0].plot(tm, x, lw=0.3)
    for a, b in truth:
        ax[0].axvspan(a * 1e3, b * 1e3, color="g", alpha=0.15)
    for a, (name, evs) in zip(ax[1:], found.items()):
        for e in evs:
            a.axvspan(e.onset / fs * 1e3, e.endpoint / fs * 1e3, color="C1", alpha=0.6)
        a.set_yticks([]); a.set_ylabel(name, rotation=0, ha="right", fontsize=8)
    ax[-1].set_xlabel("time [ms]")
    save(fig, "03_detectors.png")
