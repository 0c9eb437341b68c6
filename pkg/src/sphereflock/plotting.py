"""Static SVG figures rendered from the run CSVs."""

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import read_csv  # noqa: E402

golden_mean = (math.sqrt(5) - 1.0) / 2.0
fig_width = 4.5

params = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "sphereflock",  # stable element ids between runs
    "figure.subplot.left": 0.16,
    "figure.subplot.bottom": 0.18,
    "figure.subplot.right": 0.96,
    "figure.subplot.top": 0.92,
}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_energy(cols, path):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot(cols["t"], cols["E"], label="E", color="k")
        ax.plot(cols["t"], cols["E_K"], label="kinetic", ls="--")
        ax.plot(cols["t"], cols["E_C"], label="configuration", ls=":")
        ax.set_xlabel("t")
        ax.set_ylabel("energy")
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_flock_metric(cols, path):
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        t = cols["t"]
        fm = cols["flock_metric"]
        # zeros are common once aligned; keep them visible on the log axis
        floor = min([f for f in fm if f > 0], default=1e-16)
        ax.semilogy(t, [max(f, floor) for f in fm], color="C3")
        ax.set_xlabel("t")
        ax.set_ylabel("flocking metric")
        return _save(fig, path)


def plot_run(out_dir):
    """Render ``energy.svg`` and ``flock_metric.svg`` from ``timeseries.csv``."""
    cols = read_csv(os.path.join(out_dir, "timeseries.csv"))
    return [plot_energy(cols, os.path.join(out_dir, "energy.svg")),
            plot_flock_metric(cols, os.path.join(out_dir, "flock_metric.svg"))]


def plot_sweep(out_dir):
    cols = read_csv(os.path.join(out_dir, "sweep.csv"))
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ok = [bool(c) for c in cols["flocking_condition"]]
        fm = [f if isinstance(f, float) and f > 0 else 1e-16 for f in cols["final_flock_metric"]]
        for flag, marker, label in ((True, "o", "condition holds"), (False, "x", "condition fails")):
            xs = [s for s, o in zip(cols["sigma"], ok) if o == flag]
            ys = [f for f, o in zip(fm, ok) if o == flag]
            if xs:
                ax.semilogy(xs, ys, marker, label=label)
        ax.set_xlabel("sigma")
        ax.set_ylabel("final flocking metric")
        ax.legend(frameon=False)
        return [_save(fig, os.path.join(out_dir, "sweep.svg"))]
