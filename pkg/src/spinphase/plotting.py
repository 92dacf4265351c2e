"""Static figures written next to the CSV output of the CLI."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 11,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "figure.dpi": 120,
}


def plot_sweep(records, path, title=None):
    """Second moment P against g, one curve per field angle."""
    thetas = sorted({r.theta for r in records})
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.6))
        for t in thetas:
            rows = [r for r in records if r.theta == t]
            ax.plot([r.g for r in rows], [r.P for r in rows], lw=1.2,
                    label=rf"$\Theta/\pi={t / np.pi:.4g}$")
        ax.set_xlabel(r"$g$")
        ax.set_ylabel(r"$\mathcal{P}$")
        ax.set_ylim(0.45, 1.02)
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", ncol=2, frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_husimi_grid(axes, values, names, path):
    """Heat map (2 scanned variables) or line plot (1 variable).

    Three-variable grids are shown as slices through the middle of the
    third axis.
    """
    values = np.asarray(values)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.4, 3.6))
        if len(axes) == 1:
            ax.plot(axes[0], values)
            ax.set_xlabel(names[0])
            ax.set_ylabel("H")
        else:
            if len(axes) == 3:
                values = values[:, :, values.shape[2] // 2]
            mesh = ax.pcolormesh(axes[1], axes[0], values, shading="auto", cmap="viridis")
            ax.set_xlabel(names[1])
            ax.set_ylabel(names[0])
            fig.colorbar(mesh, ax=ax, label="H")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
