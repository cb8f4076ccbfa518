"""Static log-log figure rendering for solver traces."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["save_loglog"]


def save_loglog(series, path, title: str = "", ylabel: str = "value"):
    """Render one log-log line per (label, ks, values) triple to ``path``.

    Nonpositive and nonfinite values are dropped (log axes).  The output
    format follows the file extension; .svg and .png both work.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    drew = False
    for label, ks, vals in series:
        ks = np.asarray(ks, dtype=float)
        vals = np.asarray(vals, dtype=float)
        mask = (vals > 0) & np.isfinite(vals) & (ks > 0)
        if not mask.any():
            continue
        ax.loglog(ks[mask], vals[mask], label=label, linewidth=1.2)
        drew = True
    ax.set_xlabel("iteration k")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    if drew:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
