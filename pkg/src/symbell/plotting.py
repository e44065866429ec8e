"""Optional matplotlib rendering of the violation sweeps emitted by the CLI.

The CSV/JSON rows are the data of record; figures are a convenience view of
the same rows. Requires the ``plot`` extra.
"""
from __future__ import annotations

from collections import defaultdict


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on the environment
        raise RuntimeError("figure rendering needs matplotlib (pip install 'symbell[plot]')") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.labelsize": 9, "legend.fontsize": 7, "figure.dpi": 150})
    return plt


def render_sweep(rows: list[dict], path: str, *, title: str = "") -> None:
    """Two-panel figure: effective violation against n (panel ``a``) and
    against theta for each n (panel ``b``)."""
    plt = _pyplot()
    fig, (ax_n, ax_t) = plt.subplots(1, 2, figsize=(7.0, 2.8))

    by_n = sorted((r for r in rows if r["panel"] == "a"), key=lambda r: r["n"])
    if by_n:
        ns = [r["n"] for r in by_n]
        ev = [abs(r["effective_violation"]) for r in by_n]
        ax_n.loglog(ns, ev, "o-", color="tab:red", ms=3)
        ax_n.set_xlabel("n")
        ax_n.set_ylabel("|effective violation|")
        twin = ax_n.twinx()
        twin.semilogx(ns, [r["theta"] for r in by_n], "s--", color="tab:blue", ms=2)
        twin.set_ylabel("optimal theta", color="tab:blue")

    curves = defaultdict(list)
    for r in rows:
        if r["panel"] == "b":
            curves[r["n"]].append((r["theta"], r["effective_violation"]))
    for n in sorted(curves):
        pts = sorted(curves[n])
        ax_t.plot([p[0] for p in pts], [p[1] for p in pts], lw=1, label=f"n={n}")
    if curves:
        ax_t.axhline(0.0, color="0.6", lw=0.5)
        ax_t.set_xlabel("theta")
        ax_t.set_ylabel("effective violation")
        ax_t.legend(frameon=False)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
