"""Figure rendering for the report paths of the CLI.

matplotlib is imported lazily with the Agg backend so library users who
never plot pay nothing and headless runs never touch a display.
"""

from __future__ import annotations

from collections import Counter


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_topology(topo, keyrings, out_path) -> None:
    """Physical links as grey segments, nodes colored by overlay in-degree."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 7))
    xs = topo.positions[:, 0]
    ys = topo.positions[:, 1]
    for u in range(topo.n):
        for v in topo.neighbors[u]:
            if v > u:
                ax.plot([xs[u], xs[v]], [ys[u], ys[v]],
                        color="0.8", linewidth=0.6, zorder=1)
    indeg = Counter()
    for ring in keyrings:
        for v in ring.known:
            if v != ring.owner:
                indeg[v] += 1
    colors = [indeg[i] for i in range(topo.n)]
    sc = ax.scatter(xs, ys, c=colors, cmap="viridis", s=18, zorder=2)
    fig.colorbar(sc, ax=ax, label="overlay in-degree")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"n={topo.n}, range={topo.radio_range:g}")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_path_stats(stats, out_path) -> None:
    """Disjoint-path count histogram plus a length CDF."""
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    counts = stats.counts()
    if counts:
        top = max(counts)
        ax1.hist(counts, bins=range(0, top + 2), align="left",
                 color="steelblue", edgecolor="white")
    ax1.set_xlabel("vertex-disjoint paths per pair")
    ax1.set_ylabel("pairs")
    lengths = sorted(stats.lengths())
    if lengths:
        frac = [i / len(lengths) for i in range(1, len(lengths) + 1)]
        ax2.step(lengths, frac, where="post", color="darkorange")
    ax2.set_xlabel("path length (overlay hops)")
    ax2.set_ylabel("fraction of paths")
    ax2.set_ylim(0, 1.02)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_reliability(rows, out_path) -> None:
    """Analytic curves (lines) and simulated points (markers) versus the
    relay count, one series per (p, rho) setting."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 5))
    series = {}
    for row in rows:
        series.setdefault((row["p"], row["rho"]), []).append(row)
    for (p, rho), cells in sorted(series.items()):
        cells.sort(key=lambda r: r["de"])
        de = [c["de"] for c in cells]
        ana = [c["R_analytic"] for c in cells]
        line, = ax.plot(de, ana, label=f"p={p:g}, rho={rho}")
        mc = [(c["de"], c["R_mc"]) for c in cells if c["R_mc"] is not None]
        if mc:
            ax.plot([m[0] for m in mc], [m[1] for m in mc], "o",
                    color=line.get_color(), markersize=4)
    ax.set_xlabel("decrypt-encrypt relays per path")
    ax.set_ylabel("delivery reliability")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_attack_sweep(rows, theta: int, out_path) -> None:
    """Attacker success rate and mean intact paths against the
    compromised-node fraction."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 5))
    rows = sorted(rows, key=lambda r: r.fraction)
    fr = [r.fraction for r in rows]
    ax.plot(fr, [r.attack_success_rate for r in rows], "o-",
            color="crimson", label=f"attack success (theta={theta})")
    ax.set_xlabel("fraction of compromised nodes")
    ax.set_ylabel("attacker success rate")
    ax.set_ylim(-0.02, 1.02)
    ax2 = ax.twinx()
    ax2.plot(fr, [r.mean_secure_paths for r in rows], "s--",
             color="steelblue", label="mean intact paths")
    ax2.set_ylabel("mean intact paths")
    h1, l1 = ax.get_legend_handles_labels()
    h2, l2 = ax2.get_legend_handles_labels()
    ax.legend(h1 + h2, l1 + l2, loc="center right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_sessions(reports, out_path) -> None:
    """Outcome tallies and the distribution of relay decrypt steps."""
    plt = _plt()
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    outcomes = Counter(
        "success" if r.success else (r.failure_reason or "failed")
        for r in reports
    )
    labels = sorted(outcomes)
    ax1.bar(labels, [outcomes[l] for l in labels], color="steelblue")
    ax1.set_ylabel("sessions")
    ax1.tick_params(axis="x", rotation=20)
    totals = [r.de_total for r in reports]
    if totals:
        top = max(totals)
        ax2.hist(totals, bins=range(0, top + 2), align="left",
                 color="darkorange", edgecolor="white")
    ax2.set_xlabel("total decrypt-encrypt steps per session")
    ax2.set_ylabel("sessions")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
