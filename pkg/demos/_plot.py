"""Optional plotting: figures are saved next to the scripts when matplotlib is installed."""

from pathlib import Path

OUT = Path(__file__).with_name("figures")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # demos still print their numbers
    plt = None


def save(fig, name):
    OUT.mkdir(exist_ok=True)
    fig.savefig(OUT / name, dpi=110, bbox_inches="tight")
    plt.close(fig)
    print("figure:", OUT / name)
