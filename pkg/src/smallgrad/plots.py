"""Figure rendering for experiment reports.

One curve per method on a log-scale y axis, with shaded +-1 standard
deviation bands computed in log10 space (so the bands look asymmetric on
the linear view, emphasizing passes with large spread).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_summary_figure(stats, ylabel: str, path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for st in sorted(stats, key=lambda s: s.method):
        ax.plot(st.passes, 10.0 ** st.mean_log10, label=st.method, lw=1.6)
        ax.fill_between(st.passes,
                        10.0 ** (st.mean_log10 - st.std_log10),
                        10.0 ** (st.mean_log10 + st.std_log10),
                        alpha=0.2)
    ax.set_yscale("log")
    ax.set_xlabel("passes over data")
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
