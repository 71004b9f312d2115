"""Static SVG plots of observed vs. counterfactual series.

SVG output is byte-reproducible: the renderer uses a fixed hash salt and
drops the embedded creation date.
"""

import matplotlib

matplotlib.use("svg")

import matplotlib.pyplot as plt

__all__ = ["plot_counterfactual"]

_SVG_HASHSALT = "sctrim"


def plot_counterfactual(path, time_labels, observed, fitted, t0, title=""):
    """Write an SVG of observed vs. fitted series with the intervention line."""
    plt.rcParams["svg.hashsalt"] = _SVG_HASHSALT
    fig, ax = plt.subplots(figsize=(8, 4.5))
    x = range(len(observed))
    ax.plot(x, observed, color="black", lw=1.5, label="observed")
    ax.plot(x, fitted, color="tab:blue", lw=1.5, ls="--", label="counterfactual")
    ax.axvline(t0 - 0.5, color="tab:red", lw=1.0, ls=":", label="intervention")
    step = max(1, len(observed) // 8)
    ticks = list(range(0, len(observed), step))
    ax.set_xticks(ticks)
    ax.set_xticklabels([str(time_labels[i]) for i in ticks])
    ax.set_xlabel("period")
    ax.set_ylabel("outcome")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
