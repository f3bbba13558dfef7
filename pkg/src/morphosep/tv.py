"""Total-variation three-way separation (voice / harmonic / percussive).

Minimizes a convex objective that penalizes temporal roughness of the
harmonic mask, spectral roughness of the percussive mask and the l1 mass of
the voice mask, under the constraint M_v + M_h + M_p = W with all masks
non-negative, where W is the gamma-compressed spectrogram |X|^(2*gamma).

The solver is a clamped coordinate sweep. Setting the objective's partial
derivatives to zero gives the stationarity updates

    M_h[n, m] <- min((M_h[n+1, m] + M_h[n-1, m]) / 2 + lambda2 / 2,
                     W[n, m] - M_p[n, m])
    M_p[n, m] <- min((M_p[n, m+1] + M_p[n, m-1]) / 2 + lambda2 / (2*lambda1),
                     W[n, m] - M_h[n, m])

(n = time frame, m = frequency bin). Each iteration runs a full M_h sweep
then a full M_p sweep in frame-major order, Gauss-Seidel style; neighbors
outside the matrix are treated as zero and values are clamped below at 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .audio import AudioSignal
from .io import resample
from .masking import MaskSet, SeparationResult, wiener_apply
from .stft import StftConfig, istft, spectrogram, stft


@dataclass(frozen=True)
class TvConfig:
    lambda1: float = 0.25
    lambda2: float = 0.025
    gamma: float = 0.25
    n_iter: int = 200
    highpass_hz: float = 120.0
    target_rate: int = 16000
    frame_ms: float = 64.0
    overlap: float = 0.75

    def __post_init__(self):
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("lambda1 and lambda2 must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be at least 1, got {self.n_iter}")

    def stft_config(self) -> StftConfig:
        return StftConfig.from_ms(self.target_rate, self.frame_ms, self.overlap)

    @property
    def wiener_alpha(self) -> float:
        # exponent applied to the compressed-domain masks on re-synthesis
        return 1.0 / (2.0 * self.gamma)


def tv_masks(w: np.ndarray, cfg: TvConfig | None = None, callback=None) -> MaskSet:
    """Run the clamped coordinate sweeps on W and return {M_v, M_h, M_p}.

    ``callback(it, m_h, m_p)``, when given, is invoked after every full
    iteration with read-only views of the working masks.
    """
    if cfg is None:
        cfg = TvConfig()
    w = np.asarray(w, dtype=np.float64)
    if w.size and w.min() < 0:
        raise ValueError("W must be non-negative")

    n_freq, n_frames = w.shape
    m_h = np.zeros_like(w)
    m_p = np.zeros_like(w)
    bonus_h = cfg.lambda2 / 2.0
    bonus_p = cfg.lambda2 / (2.0 * cfg.lambda1)
    zeros_col = np.zeros(n_freq)
    zeros_row = np.zeros(n_frames)

    for it in range(1, cfg.n_iter + 1):
        # harmonic sweep: averages time neighbors, one frame at a time
        for n in range(n_frames):
            left = m_h[:, n - 1] if n > 0 else zeros_col
            right = m_h[:, n + 1] if n + 1 < n_frames else zeros_col
            cand = 0.5 * (left + right) + bonus_h
            m_h[:, n] = np.maximum(np.minimum(cand, w[:, n] - m_p[:, n]), 0.0)
        # percussive sweep: averages frequency neighbors, one bin at a time
        for m in range(n_freq):
            below = m_p[m - 1, :] if m > 0 else zeros_row
            above = m_p[m + 1, :] if m + 1 < n_freq else zeros_row
            cand = 0.5 * (below + above) + bonus_p
            m_p[m, :] = np.maximum(np.minimum(cand, w[m, :] - m_h[m, :]), 0.0)
        if callback is not None:
            callback(it, m_h, m_p)

    m_v = w - (m_h + m_p)
    np.maximum(m_v, 0.0, out=m_v)
    return MaskSet(
        masks=[m_v, m_h, m_p],
        labels=["voice", "harmonic", "percussive"],
        alpha=cfg.wiener_alpha,
    )


def _highpass(x: AudioSignal, cutoff_hz: float) -> AudioSignal:
    sos = sps.butter(4, cutoff_hz, btype="highpass", fs=x.sample_rate, output="sos")
    return AudioSignal(sps.sosfiltfilt(sos, x.samples), x.sample_rate)


def tv_separate(x: AudioSignal, cfg: TvConfig | None = None) -> SeparationResult:
    """Full pipeline: resample, high-pass, compress, sweep, Wiener, invert.

    Output signals are at ``cfg.target_rate``; their sum reconstructs the
    resampled and high-passed mixture up to STFT round-trip error.
    """
    if cfg is None:
        cfg = TvConfig()
    prepped = _highpass(resample(x, cfg.target_rate), cfg.highpass_hz)
    x_stft = stft(prepped, cfg.stft_config())
    w = spectrogram(x_stft, cfg.gamma)
    # the per-sweep mask increments are absolute, so bring W to unit scale
    # (the Wiener fractions below are scale-invariant)
    if w.any():
        w = w / w.max()
    masks = tv_masks(w, cfg)
    stfts = wiener_apply(x_stft, masks)
    return SeparationResult(
        signals=[istft(s) for s in stfts],
        stfts=stfts,
        labels=list(masks.labels),
    )
