"""Figure rendering for the CLI report path.

Each CLI subcommand that produces curve-like data hands a small plot
spec to :func:`render`, which writes a PNG next to the delimited
output.  Figures are presentation artifacts; the CSV/JSON files remain
the authoritative, byte-deterministic outputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_STYLE = {
    "figure.figsize": (6.4, 4.2),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.labelsize": 11,
    "legend.fontsize": 9,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
}


def render(spec: dict, path: str) -> None:
    """Draw one figure described by a plot spec and save it to ``path``.

    spec keys: kind ('lines' | 'errorbar' | 'scatter'), x, series
    [(label, ys)] or points, optional yerr, xlabel/ylabel/title, logy.
    """
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        kind = spec.get("kind", "lines")
        if kind == "lines":
            for label, ys in spec["series"]:
                ax.plot(spec["x"], ys, marker="o", label=label)
        elif kind == "errorbar":
            for label, ys, err in spec["series"]:
                ax.errorbar(spec["x"], ys, yerr=err, fmt="o-", capsize=3,
                            label=label)
        elif kind == "scatter":
            xs, ys = spec["points"]
            ax.scatter(xs, ys, s=14)
        else:
            raise ValueError(f"unknown plot kind {kind!r}")
        if spec.get("logy"):
            ax.set_yscale("log")
        ax.set_xlabel(spec.get("xlabel", ""))
        ax.set_ylabel(spec.get("ylabel", ""))
        if spec.get("title"):
            ax.set_title(spec["title"])
        if kind != "scatter" and len(spec.get("series", ())) > 0:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, dpi=150)
        plt.close(fig)
