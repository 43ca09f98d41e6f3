"""Figure rendering for the report paths (sweep and distribution commands).

Figures land next to the delimited output as PNG files; they visualize the
same rows, never additional computation.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"dpi": 150, "metadata": {"Software": None}}


def render_sweep_figures(result, outdir: Path, prefix: str = "sweep") -> list[Path]:
    """Scatter of the normalized fourth moment and its histogram on the filter."""
    outdir = Path(outdir)
    paths = []
    lam = np.asarray([r.lam for r in result.rows])
    n4 = np.asarray([r.normalized_fourth for r in result.rows])
    good = np.asarray([r.good for r in result.rows])
    filt = np.asarray([r.in_filter for r in result.rows])
    keep = np.isfinite(n4)
    c_eps = result.summary.get("c_epsilon_empirical")

    fig, ax = plt.subplots(figsize=(7.2, 4.2))
    sel = keep & good & filt
    other = keep & ~sel
    ax.plot(lam[other], n4[other], ".", ms=3, color="0.65", label="outside filter / bad")
    ax.plot(lam[sel], n4[sel], ".", ms=3.5, color="tab:blue", label="filtered good")
    ax.axhline(3.0, color="tab:red", ls="--", lw=1, label="Gaussian value 3")
    if c_eps is not None and isinstance(c_eps, float) and math.isfinite(c_eps):
        ax.axhline(3.0 - 3.0 * c_eps, color="tab:green", ls=":", lw=1,
                   label=r"3 - 3 $C_\epsilon$")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("normalized fourth moment")
    ax.set_ylim(1.0, 3.2)
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    p = outdir / f"{prefix}_moments.png"
    fig.savefig(p, **_SAVE_KW)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    hist = result.summary["normalized_fourth_histogram"]
    lo = np.asarray(hist["bin_lo"])
    hi = np.asarray(hist["bin_hi"])
    counts = np.asarray(hist["count"])
    ax.bar(lo, counts, width=hi - lo, align="edge", color="tab:blue", edgecolor="none")
    ax.axvline(3.0, color="tab:red", ls="--", lw=1, label="Gaussian value 3")
    ax.set_xlabel("normalized fourth moment (filtered good)")
    ax.set_ylabel("count")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p = outdir / f"{prefix}_histogram.png"
    fig.savefig(p, **_SAVE_KW)
    plt.close(fig)
    paths.append(p)
    return paths


def render_distribution_figure(dist, stats: dict, path: Path) -> Path:
    """Histogram density of the normalized field against the standard normal."""
    lo = np.asarray(dist.bin_lo)
    hi = np.asarray(dist.bin_hi)
    mass = np.asarray(dist.mass)
    finite = np.isfinite(lo) & np.isfinite(hi)
    width = hi[finite] - lo[finite]
    density = mass[finite] / width
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(lo[finite], density, width=width, align="edge",
           color="tab:blue", alpha=0.7, edgecolor="none", label="field values")
    x = np.linspace(-4.5, 4.5, 400)
    ax.plot(x, np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi), "r--", lw=1.2,
            label="standard normal")
    ax.set_xlim(-4.5, 4.5)
    ax.set_xlabel("g")
    ax.set_ylabel("density")
    ax.set_title(
        f"lambda={stats['lambda']:g}   m4={stats['m4']:.4f}   "
        f"KS={stats['kolmogorov_distance']:.4f}"
    )
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return Path(path)
