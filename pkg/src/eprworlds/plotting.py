"""Static figures for correlation scans and binned runs, written straight to files."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "font.size": 11,
    "axes.labelsize": 12,
    "axes.titlesize": 12,
    "legend.fontsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "svg.hashsalt": "eprworlds",
}


def _figure(width=6.0, height=None):
    golden = (math.sqrt(5) - 1.0) / 2.0
    return plt.subplots(figsize=(width, height or width * golden))


def _save(fig, path):
    # fixed metadata keeps repeated renders byte-stable for png/svg/pdf
    fmt = str(path).rsplit(".", 1)[-1].lower()
    metadata = {"Software": None} if fmt == "png" else {"Creator": None, "Date": None} if fmt in ("svg", "pdf") else None
    fig.savefig(path, bbox_inches="tight", metadata=metadata)
    plt.close(fig)


def plot_scan(table, path):
    """E(theta) from both quantum routes, the -cos reference, and the LHV column if present."""
    theta = np.array([r.theta_deg for r in table.rows])
    with plt.rc_context(_RC):
        fig, ax = _figure()
        fine = np.linspace(theta.min(), theta.max(), 400)
        ax.plot(fine, -np.cos(np.radians(fine)), color="0.75", lw=3, label=r"$-\cos\theta$")
        ax.plot(theta, [r.e_world_counting for r in table.rows], "o", ms=3, color="C0", label="world counting")
        ax.plot(theta, [r.e_operator for r in table.rows], "-", lw=1, color="C1", label="operator expectation")
        if table.lhv_strategy is not None:
            ax.errorbar(
                theta,
                [r.e_lhv for r in table.rows],
                yerr=[3 * r.lhv_stderr for r in table.rows],
                fmt=".",
                color="C2",
                label=f"LHV ({table.lhv_strategy}), 3$\\sigma$",
            )
        ax.set_xlabel(r"angle between axes $\theta$ (deg)")
        ax.set_ylabel(r"$P(\hat n_1, \hat n_2)$")
        ax.set_ylim(-1.05, 1.05)
        ax.axhline(0, color="0.85", lw=0.8, zorder=0)
        ax.legend(frameon=False, loc="upper left")
        _save(fig, path)


def plot_bins(report, path):
    """Per-bin mean products against the -cos curve, with the pooled mean marked."""
    with plt.rc_context(_RC):
        fig, ax = _figure()
        fine = np.linspace(0.0, 180.0, 400)
        ax.plot(fine, -np.cos(np.radians(fine)), color="0.75", lw=3, label=r"$-\cos\theta$")
        filled = [b for b in report.bins if b.runs]
        ax.errorbar(
            [b.theta_center for b in filled],
            [b.mean_product for b in filled],
            xerr=[b.tolerance for b in filled],
            yerr=[3 * b.stderr for b in filled],
            fmt="o",
            ms=4,
            color="C0",
            label="binned runs",
        )
        ax.axhline(report.pooled_mean, color="C3", ls="--", lw=1, label=f"pooled mean {report.pooled_mean:+.4f}")
        ax.set_xlabel(r"bin centre $\theta$ (deg)")
        ax.set_ylabel("mean outcome product")
        ax.set_xlim(-5, 185)
        ax.set_ylim(-1.1, 1.1)
        ax.legend(frameon=False, loc="upper left")
        _save(fig, path)
