"""Figure rendering for the CLI report paths (written next to the data files)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .kam import Kernel
from .stft import Stft
from .vad import DetectionLattice

_EPS_DB = 1e-12


def save_spectrogram_figure(path, stfts: list[Stft], titles: list[str]) -> None:
    """Log-magnitude spectrograms of the mixture/estimates, stacked."""
    n = len(stfts)
    fig, axes = plt.subplots(n, 1, figsize=(9, 2.6 * n), squeeze=False, sharex=True)
    for ax, s, title in zip(axes[:, 0], stfts, titles):
        mag_db = 20.0 * np.log10(np.abs(s.data) + _EPS_DB)
        extent = (0.0, s.frame_times()[-1] if s.n_frames > 1 else 1.0,
                  0.0, s.bin_frequencies()[-1])
        ax.imshow(mag_db, origin="lower", aspect="auto", extent=extent,
                  vmin=mag_db.max() - 80.0, vmax=mag_db.max(), cmap="magma")
        ax.set_ylabel("Hz")
        ax.set_title(title)
    axes[-1, 0].set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_detection_figure(
    path,
    lattice: DetectionLattice,
    voice_thr: float = 0.5,
    truth_segments: list[tuple[float, float]] | None = None,
) -> None:
    """VTMR curve with the decision threshold, detections and optional truth."""
    fig, ax = plt.subplots(figsize=(9, 3.2))
    if truth_segments:
        for start, end in truth_segments:
            ax.axvspan(start, end, color="tab:green", alpha=0.15, lw=0)
    ax.plot(lattice.times, lattice.vtmr, color="black", lw=1.0, label="VTMR")
    ax.axhline(voice_thr, color="tab:blue", ls="--", lw=0.8, label="threshold")
    if lattice.decision is not None and lattice.decision.any():
        on = lattice.decision
        ax.plot(lattice.times[on], lattice.vtmr[on], "x", color="tab:red",
                ms=4, label="voice frames")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("VTMR")
    ax.set_ylim(-0.02, 1.05)
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_kernel_figure(path, kernels: list[Kernel], titles: list[str] | None = None) -> None:
    """Side-by-side heatmaps of (trained or binary) kernels."""
    if titles is None:
        titles = [k.label for k in kernels]
    n = len(kernels)
    fig, axes = plt.subplots(1, n, figsize=(3.0 * n, 3.0), squeeze=False)
    for ax, k, title in zip(axes[0], kernels, titles):
        ax.imshow(k.values, origin="lower", aspect="auto", cmap="viridis")
        ax.set_title(title)
        ax.set_xlabel("frames")
        ax.set_ylabel("bins")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
