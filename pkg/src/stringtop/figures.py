"""Page charts: one PNG per spectral sequence page."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .exact_linalg import group_str  # noqa: E402


def page_chart(page, title: str = ""):
    """Entries as labelled dots at (p, q); nonzero differentials as arrows."""
    fig, ax = plt.subplots(figsize=(6, 5))
    ring = page.ring
    for (p, q), idxs in sorted(page.entries.items()):
        g = group_str([page.elements[i].order for i in idxs], ring)
        ax.plot(p, q, "o", color="tab:blue")
        ax.annotate(g, (p, q), textcoords="offset points", xytext=(4, 4), fontsize=7)
    if page.d:
        for (p, q) in page.entries:
            M = page.d_matrix(p, q)
            if M.nrows and not M.is_zero():
                tp, tq = page.target_bidegree(p, q)
                ax.annotate("", xy=(tp, tq), xytext=(p, q),
                            arrowprops=dict(arrowstyle="->", color="tab:red"))
    ax.set_xlabel("p")
    ax.set_ylabel("q")
    ax.set_title(title or f"E^{page.r}")
    ax.grid(True, alpha=0.3)
    ps = [p for p, _ in page.entries] or [0]
    qs = [q for _, q in page.entries] or [0]
    ax.set_xlim(min(ps) - 1, max(ps) + 1)
    ax.set_ylim(min(qs) - 1, max(qs) + 1)
    fig.tight_layout()
    return fig


def write_page_charts(figures, directory: str) -> list[str]:
    """Save (stem, page) pairs as DIR/<stem>.png; returns the written paths."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for stem, page in figures:
        fig = page_chart(page, stem)
        path = os.path.join(directory, f"{stem}.png")
        fig.savefig(path, dpi=100, metadata={"Software": None})
        plt.close(fig)
        paths.append(path)
    return paths
