"""Optional PNG figures for a finished report (enabled by ``--plot``).

matplotlib is imported lazily with the Agg backend so the default CSV/JSON
path never needs it.
"""

import os

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _error_curves(report, path, plt):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for o in report.outcomes:
        ks = [h.k for h in o.history if h.rel_err is not None]
        rs = [max(h.rel_err, 1e-18) for h in o.history if h.rel_err is not None]
        ax.semilogy(ks, rs, lw=0.8, alpha=0.7)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("relative error")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _success_vs_m(report, path, plt):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    by_s = {}
    for row in report.table.rows:
        by_s.setdefault(row["s"], []).append((row["m"], row["success_rate"]))
    for s, pts in sorted(by_s.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"s={s}")
    ax.set_xlabel("m")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _grid(report, path, plt):
    ss = sorted({row["s"] for row in report.table.rows})
    ms = sorted({row["m"] for row in report.table.rows})
    grid = np.zeros((len(ss), len(ms)))
    for row in report.table.rows:
        grid[ss.index(row["s"]), ms.index(row["m"])] = row["success_rate"]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    im = ax.imshow(grid, origin="lower", cmap="gray", vmin=0, vmax=1, aspect="auto")
    ax.set_xticks(range(len(ms)), ms, fontsize=7)
    ax.set_yticks(range(len(ss)), ss, fontsize=7)
    ax.set_xlabel("m")
    ax.set_ylabel("s")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _timing(report, path, plt):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    rows = sorted(report.timing.rows, key=lambda r: r["n"])
    ax.loglog([r["n"] for r in rows], [r["mean_time_s"] for r in rows], marker="o")
    ax.set_xlabel("n")
    ax.set_ylabel("mean solver time (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _signal(report, path, plt):
    o = report.outcomes[0]
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.plot(o.arrays["signal"], lw=0.8, label="true")
    ax.plot(np.real(o.arrays["estimate"]), lw=0.8, ls="--", label="estimate")
    ax.set_title(f"PSNR {o.psnr:.2f} dB", fontsize=9)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _image(report, path, plt):
    o = report.outcomes[0]
    fig, axes = plt.subplots(1, 2, figsize=(6, 3))
    for ax, img, title in zip(axes, (o.arrays["true_image"], o.arrays["estimate"]),
                              ("target", f"estimate, PSNR {o.psnr:.2f} dB")):
        ax.imshow(img, cmap="gray")
        ax.set_title(title, fontsize=9)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


_FIGURES = {
    "convergence": [("rel_error.png", _error_curves)],
    "dft": [("rel_error.png", _error_curves)],
    "timing": [("timing.png", _timing)],
    "transition_curve": [("success_rate.png", _success_vs_m)],
    "transition_grid": [("success_grid.png", _grid)],
    "reconstruct_1d": [("signal.png", _signal)],
    "reconstruct_2d": [("image.png", _image)],
}


def render(report, out_dir):
    """Write the family's figures into ``out_dir``; returns the file names."""
    plt = _pyplot()
    names = []
    for name, fn in _FIGURES[report.family]:
        fn(report, os.path.join(out_dir, name), plt)
        names.append(name)
    return names
