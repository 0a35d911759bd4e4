# %% [markdown]
# # A synthetic acoustic-emission burst
#
# A burst is a sine switched on at the arrival time, with an exponentially
# decaying envelope. The truth interval runs from the arrival to five decay
# constants later.

# %%
import math

import numpy as np

from aedetect import AeSourceParams, add_awgn, synth_ae
from _plot import plt, save

fs = 5e6
src = AeSourceParams(amplitude=0.6, arrival=5e-3, decay=1e-3, frequency=250e3, duration=45e-3)
clean = synth_ae(src, fs)
print("samples:", len(clean), " truth interval (s):", src.truth_interval())

# %%
# envelope at one decay constant is e^-1 of the amplitude
print("envelope / A at arrival + decay:", float(src.envelope(src.arrival + src.decay)) / src.amplitude)

# %%
# white noise added for a target SNR, measured back from the residual
for snr in (27, 20, 15, 10):
    noisy = add_awgn(clean, snr, seed=1)
    r = noisy.samples - clean.samples
    print(f"target {snr:>2} dB  measured {10 * math.log10(clean.power() / np.mean(r ** 2)):.2f} dB")

# %%
if plt:
    t = clean.times() * 1e3
    fig, ax = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    ax[0].plot(t, clean.samples, lw=0.5)
    ax[0].plot(t, np.where(t >= 5, src.envelope(clean.times()), np.nan), "r--", lw=1)
    ax[0].set_ylabel("clean [V]")
    ax[1].plot(t, add_awgn(clean, 10, seed=1).samples, lw=0.3)
    ax[1].set_ylabel("10 dB [V]")
    ax[1].set_xlabel("time [ms]")
    ax[1].set_xlim(4, 12)
    save(fig, "01_burst.png")
