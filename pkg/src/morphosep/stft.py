"""Short-time Fourier analysis/synthesis and spectrogram computation.

Conventions used throughout the toolkit:

* frames are centered: the signal is zero-padded by half a window at both
  ends, so frame ``n`` covers the samples around ``n * hop``;
* the one-sided spectrum is stored (``F = window_length // 2 + 1`` bins)
  and conjugate symmetry is restored on inversion;
* synthesis uses weighted overlap-add with per-sample normalization by the
  shifted squared-window sum, which makes ``istft(stft(x))`` reproduce the
  input exactly (to float64 round-off) whenever ``hop <= window_length / 2``.

All spectrogram-shaped arrays in this package are laid out ``(F, T)``:
rows are frequency bins, columns are time frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .audio import AudioSignal

_WINDOWS = ("hann",)


@dataclass(frozen=True)
class StftConfig:
    """Analysis configuration; also everything needed for exact inversion."""

    window_length: int = 2048
    hop: int = 512
    window: str = "hann"
    sample_rate: int = 22050

    def __post_init__(self):
        if self.window_length <= 0:
            raise ValueError(f"window_length must be positive, got {self.window_length}")
        if self.hop <= 0:
            raise ValueError(f"hop must be positive, got {self.hop}")
        if self.hop > self.window_length:
            raise ValueError(
                f"hop ({self.hop}) must not exceed window_length ({self.window_length})"
            )
        if self.window not in _WINDOWS:
            raise ValueError(f"unsupported window {self.window!r}, expected one of {_WINDOWS}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def n_bins(self) -> int:
        return self.window_length // 2 + 1

    def window_array(self) -> np.ndarray:
        """Periodic Hann window (constant overlap-add at 3/4 overlap)."""
        n = self.window_length
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)

    @classmethod
    def from_ms(cls, sample_rate: int, frame_ms: float, overlap: float = 0.75) -> "StftConfig":
        """Build a configuration from a frame length in milliseconds."""
        window_length = int(round(frame_ms * 1e-3 * sample_rate))
        hop = int(round(window_length * (1.0 - overlap)))
        return cls(window_length=window_length, hop=hop, sample_rate=sample_rate)


@dataclass
class Stft:
    """Complex time-frequency matrix (F bins x T frames) plus its config."""

    data: np.ndarray
    config: StftConfig
    original_length: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2:
            raise ValueError(f"expected a 2-D (F, T) matrix, got shape {self.data.shape}")
        if self.data.shape[0] != self.config.n_bins:
            raise ValueError(
                f"{self.data.shape[0]} frequency bins inconsistent with window_length "
                f"{self.config.window_length} (expected {self.config.n_bins})"
            )

    @property
    def n_bins(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    def frame_times(self) -> np.ndarray:
        """Center time of each frame in seconds."""
        return np.arange(self.n_frames) * self.config.hop / self.config.sample_rate

    def bin_frequencies(self) -> np.ndarray:
        """Center frequency of each bin in Hz."""
        return np.arange(self.n_bins) * self.config.sample_rate / self.config.window_length

    def copy_with(self, data: np.ndarray) -> "Stft":
        return Stft(data=data, config=self.config, original_length=self.original_length)


def stft(x: AudioSignal, cfg: StftConfig | None = None) -> Stft:
    """Analyze a signal into its one-sided STFT.

    Frame n covers the samples around ``n * hop``; the edges are zero-padded
    by half a window so every input sample is fully covered.
    """
    if cfg is None:
        cfg = StftConfig(sample_rate=x.sample_rate)
    if len(x) == 0:
        raise ValueError("cannot analyze an empty signal")

    n = cfg.window_length
    hop = cfg.hop
    pad = n // 2
    n_frames = 1 + len(x) // hop
    padded_length = (n_frames - 1) * hop + n
    xp = np.zeros(padded_length, dtype=np.float64)
    xp[pad:pad + len(x)] = x.samples

    frames = sliding_window_view(xp, n)[::hop][:n_frames]
    data = np.fft.rfft(frames * cfg.window_array(), axis=1).T
    return Stft(data=data, config=cfg, original_length=len(x))


def istft(s: Stft) -> AudioSignal:
    """Invert an STFT by weighted overlap-add.

    Each frame is windowed again on synthesis and the result is divided by
    the shifted squared-window sum, then truncated to the analyzed length.
    """
    cfg = s.config
    n = cfg.window_length
    hop = cfg.hop
    pad = n // 2
    window = cfg.window_array()

    frames = np.fft.irfft(s.data.T, n=n, axis=1)
    n_frames = s.n_frames
    padded_length = (n_frames - 1) * hop + n

    y = np.zeros(padded_length, dtype=np.float64)
    wsum = np.zeros(padded_length, dtype=np.float64)
    wsq = window ** 2
    for k in range(n_frames):
        start = k * hop
        y[start:start + n] += frames[k] * window
        wsum[start:start + n] += wsq

    good = wsum > 1e-12
    y[good] /= wsum[good]
    out = y[pad:pad + s.original_length]
    if out.size < s.original_length:
        out = np.pad(out, (0, s.original_length - out.size))
    return AudioSignal(samples=out, sample_rate=cfg.sample_rate)


def spectrogram(s: Stft, gamma: float = 1.0) -> np.ndarray:
    """Element-wise ``|X|**(2*gamma)``; ``gamma=1`` is the plain power spectrogram."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    mag2 = np.abs(s.data) ** 2
    if gamma == 1.0:
        return mag2
    return mag2 ** gamma
