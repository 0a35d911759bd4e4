# %% [markdown]
# # Short-time energy and zero-crossing rate
#
# The energy series rises with the burst and falls with its envelope. The
# zero-crossing rate sits near 0.5 on white noise and drops to about
# 2 f / fs while the tone dominates, then drifts back as the burst fades
# into the noise. The detector uses the first for the onset and the core of
# the hit, the second for the endpoint.

# %%
import numpy as np

from aedetect import (AeSourceParams, StezcrConfig, WindowSpec, add_awgn, detect, estimate_noise,
                      ste, stzcr, synth_ae)
from _plot import plt, save

fs = 5e6
src = AeSourceParams(0.5, 5e-3, 0.8e-3, 300e3, 45e-3)
sig = add_awgn(synth_ae(src, fs), 20, seed=3)
win = WindowSpec("hamming", 100)
E = ste(sig, win)
Z = stzcr(sig, win)

# %%
noise = estimate_noise(E, win.first_full(), 400, alpha=4)
print(f"noise STE mean {noise.mean:.3g}  std {noise.std:.3g}  level {noise.level:.3g} (V^2 samples)")
i = int(src.arrival * fs) + 500
print(f"STZCR before the burst {Z.values[20_000]:.3f}, inside {Z.values[i]:.3f}, tone 2f/fs = {2 * 300e3 / fs:.3f}")

# %%
trace = []
ev = detect(sig, StezcrConfig(), trace=trace)[0]
t = trace[0]
print("onset, core end, endpoint (ms):", ev.onset / fs * 1e3, ev.core_end / fs * 1e3, ev.endpoint / fs * 1e3)
print("energy threshold after adaptation:", t["itu_adjust"], " ZCR threshold:", t["izct_adjust"])

# %%
if plt:
    tm = sig.times() * 1e3
    fig, ax = plt.subplots(3, 1, figsize=(8, 7), sharex=True)
    ax[0].plot(tm, sig.samples, lw=0.3)
    ax[1].semilogy(tm, E.values + 1e-12, lw=0.6)
    ax[1].axhline(t["itu_adjust"], color="r", ls="--", lw=0.8)
    ax[1].axhline(t["itl"], color="g", ls=":", lw=0.8)
    ax[2].plot(tm, Z.values, lw=0.4)
    ax[2].axhline(t["izct_adjust"], color="r", ls="--", lw=0.8)
    for a in ax:
        for s in (ev.onset, ev.core_end, ev.endpoint):
            a.axvline(s / fs * 1e3, color="k", lw=0.6)
    ax[0].set_ylabel("x [V]"); ax[1].set_ylabel("STE"); ax[2].set_ylabel("STZCR")
    ax[2].set_xlabel("time [ms]")
    ax[2].set_xlim(4, 12)
    save(fig, "02_characteristic_functions.png")
