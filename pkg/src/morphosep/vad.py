"""Unsupervised singing-voice detection on top of any separator.

The detector band-passes the mixture and the estimated voice to the vocal
range, slides a long frame over both, and computes the voice-to-mixture
energy ratio (VTMR) per frame. Frames whose mixture energy is below the
silence threshold get VTMR 0; a frame is declared vocal when its VTMR
strictly exceeds the voice threshold.

An optional refinement estimates the fundamental frequency per frame (YIN)
and keeps only the spectrogram peak nearest each integer harmonic, routing
the residual back to the harmonic accompaniment.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal as sps

from .audio import AudioSignal
from .stft import Stft

_BANDPASS_ORDER = 8  # per edge: ~48 dB one octave out, squared by filtfilt


@dataclass(frozen=True)
class VadConfig:
    """Framing and thresholds for the detector (samples at 22050 Hz by default)."""

    frame_length: int = 8192
    step: int = 662
    silence_thr: float = 1e-4
    voice_thr: float = 0.5
    band: tuple[float, float] = (120.0, 3000.0)

    def __post_init__(self):
        if self.frame_length <= 0 or self.step <= 0:
            raise ValueError("frame_length and step must be positive")
        if self.silence_thr <= 0:
            raise ValueError(f"silence_thr must be positive, got {self.silence_thr}")
        if not 0.0 <= self.voice_thr <= 1.0:
            raise ValueError(f"voice_thr must be in [0, 1], got {self.voice_thr}")
        if not self.band[0] < self.band[1]:
            raise ValueError(f"band low must be below band high, got {self.band}")

    @classmethod
    def for_rate(cls, sample_rate: int, frame_ms: float = 371.5, step_ms: float = 30.0, **kwargs):
        """Resolve the frame/step durations against an actual sample rate."""
        return cls(
            frame_length=int(round(frame_ms * 1e-3 * sample_rate)),
            step=int(round(step_ms * 1e-3 * sample_rate)),
            **kwargs,
        )


@dataclass(frozen=True)
class YinConfig:
    threshold: float = 0.1
    f0_min: float = 80.0
    f0_max: float = 1000.0
    frame_ms: float = 46.0


@dataclass
class DetectionLattice:
    """Per-frame records: center time, energy, VTMR and the voice decision."""

    times: np.ndarray
    energy: np.ndarray
    vtmr: np.ndarray
    decision: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.energy = np.asarray(self.energy, dtype=np.float64)
        self.vtmr = np.asarray(self.vtmr, dtype=np.float64)
        if not self.times.size == self.energy.size == self.vtmr.size:
            raise ValueError("lattice columns must share one length")
        if self.decision is not None:
            self.decision = np.asarray(self.decision, dtype=bool)
            if self.decision.size != self.times.size:
                raise ValueError("decision column length mismatch")

    def __len__(self) -> int:
        return self.times.size


def bandpass(x: AudioSignal, low: float, high: float) -> AudioSignal:
    """Zero-phase Butterworth band-pass keeping [low, high] Hz."""
    nyquist = x.sample_rate / 2.0
    if not 0.0 < low < high < nyquist:
        raise ValueError(f"invalid band ({low}, {high}) Hz at fs={x.sample_rate}")
    sos = sps.butter(_BANDPASS_ORDER, (low, high), btype="bandpass", fs=x.sample_rate, output="sos")
    return AudioSignal(sps.sosfiltfilt(sos, x.samples), x.sample_rate)


def _frame_energies(samples: np.ndarray, frame_length: int, step: int) -> np.ndarray:
    csum = np.concatenate(([0.0], np.cumsum(samples ** 2)))
    starts = np.arange(0, samples.size - frame_length + 1, step)
    return csum[starts + frame_length] - csum[starts]


def vtmr(x: AudioSignal, v_hat: AudioSignal, cfg: VadConfig | None = None) -> DetectionLattice:
    """Voice-to-mixture energy ratio per frame, clamped to [0, 1].

    Frames whose mixture energy does not exceed the silence threshold get
    VTMR 0. Frames are the fully contained windows: floor((len - N)/step)+1
    of them, centered at start + N/2.
    """
    if cfg is None:
        cfg = VadConfig()
    if len(x) != len(v_hat):
        raise ValueError(f"length mismatch: {len(x)} vs {len(v_hat)}")
    if x.sample_rate != v_hat.sample_rate:
        raise ValueError("mixture and voice estimate must share one sample rate")
    if len(x) < cfg.frame_length:
        raise ValueError(f"signal shorter ({len(x)}) than one frame ({cfg.frame_length})")

    energy = _frame_energies(x.samples, cfg.frame_length, cfg.step)
    voice_energy = _frame_energies(v_hat.samples, cfg.frame_length, cfg.step)
    loud = energy > cfg.silence_thr
    ratio = np.zeros_like(energy)
    np.divide(voice_energy, energy, out=ratio, where=loud)
    np.clip(ratio, 0.0, 1.0, out=ratio)
    ratio[~loud] = 0.0

    starts = np.arange(energy.size) * cfg.step
    times = (starts + cfg.frame_length / 2.0) / x.sample_rate
    return DetectionLattice(times=times, energy=energy, vtmr=ratio)


def detect_voice(lattice: DetectionLattice, voice_thr: float = 0.5) -> DetectionLattice:
    """Decide each frame by the strict test vtmr > voice_thr."""
    if not 0.0 <= voice_thr <= 1.0:
        raise ValueError(f"voice_thr must be in [0, 1], got {voice_thr}")
    return replace(lattice, decision=lattice.vtmr > voice_thr)


def frame_truth(times: np.ndarray, segments: list[tuple[float, float]]) -> np.ndarray:
    """Boolean truth per frame: is the frame center inside a voiced segment."""
    times = np.asarray(times, dtype=np.float64)
    truth = np.zeros(times.size, dtype=bool)
    for start, end in segments:
        truth |= (times >= start) & (times < end)
    return truth


def yin_f0(frame: np.ndarray, sample_rate: int, cfg: YinConfig | None = None) -> float | None:
    """Single-frame fundamental-frequency estimate; None when unvoiced.

    Cumulative-mean-normalized difference function with an absolute
    threshold, local-minimum descent and parabolic interpolation.
    """
    if cfg is None:
        cfg = YinConfig()
    frame = np.asarray(frame, dtype=np.float64)
    tau_max = int(sample_rate / cfg.f0_min)
    tau_min = max(2, int(sample_rate / cfg.f0_max))
    if frame.size < 2 * tau_max:
        raise ValueError(
            f"frame too short: {frame.size} samples < 2 periods of {cfg.f0_min} Hz"
        )

    window = frame.size - tau_max
    csum = np.concatenate(([0.0], np.cumsum(frame ** 2)))
    corr = np.correlate(frame, frame[:window], mode="valid")
    taus_all = np.arange(tau_max + 1)
    energy_a = csum[window]
    energy_b = csum[taus_all + window] - csum[taus_all]
    diff = energy_a + energy_b - 2.0 * corr[:tau_max + 1]
    np.maximum(diff, 0.0, out=diff)

    cum = np.cumsum(diff[1:])
    cmndf = np.ones_like(diff)
    taus = np.arange(1, diff.size)
    np.divide(diff[1:] * taus, cum, out=cmndf[1:], where=cum > 0)
    cmndf[1:][cum <= 0] = 1.0

    below = np.nonzero(cmndf[tau_min:tau_max + 1] < cfg.threshold)[0]
    if below.size == 0:
        return None
    tau = tau_min + int(below[0])
    while tau + 1 <= tau_max and cmndf[tau + 1] < cmndf[tau]:
        tau += 1
    if 0 < tau < cmndf.size - 1:
        left, mid, right = cmndf[tau - 1], cmndf[tau], cmndf[tau + 1]
        denom = left - 2.0 * mid + right
        if denom > 0:
            tau = tau + 0.5 * (left - right) / denom
    return float(sample_rate / tau)


def f0_track(v: AudioSignal, frame_centers: np.ndarray, cfg: YinConfig | None = None) -> np.ndarray:
    """Per-frame F0 in Hz (NaN when unvoiced) at the given center samples."""
    if cfg is None:
        cfg = YinConfig()
    frame_length = int(round(cfg.frame_ms * 1e-3 * v.sample_rate))
    frame_length = max(frame_length, 2 * int(v.sample_rate / cfg.f0_min))
    half = frame_length // 2
    padded = np.pad(v.samples, half)
    track = np.full(len(frame_centers), np.nan)
    for i, center in enumerate(frame_centers):
        start = int(center)  # padded by half, so the slice is centered
        f0 = yin_f0(padded[start:start + frame_length], v.sample_rate, cfg)
        if f0 is not None:
            track[i] = f0
    return track


def f0_filter(v_hat: Stft, track: np.ndarray) -> tuple[Stft, Stft]:
    """Keep, per voiced frame, the strongest bin near each harmonic of F0.

    The vicinity of harmonic k*F0 spans half the inter-harmonic spacing on
    each side. Unvoiced frames are zeroed entirely. Returns (voice_refined,
    residual) with voice_refined + residual == v_hat bit-exact; the caller
    reroutes the residual to the harmonic accompaniment.
    """
    track = np.asarray(track, dtype=np.float64)
    if track.size != v_hat.n_frames:
        raise ValueError(f"track has {track.size} frames, STFT has {v_hat.n_frames}")
    data = v_hat.data
    magnitude = np.abs(data)
    bin_hz = v_hat.config.sample_rate / v_hat.config.window_length
    nyquist = v_hat.config.sample_rate / 2.0
    mask = np.zeros(data.shape, dtype=bool)

    for t, f0 in enumerate(track):
        if not np.isfinite(f0) or f0 <= 0:
            continue
        for k in range(1, int(nyquist / f0) + 1):
            lo = int(np.ceil((k - 0.5) * f0 / bin_hz))
            hi = min(int(np.floor((k + 0.5) * f0 / bin_hz)), v_hat.n_bins - 1)
            if hi < lo:
                continue
            mask[lo + int(np.argmax(magnitude[lo:hi + 1, t])), t] = True

    refined = v_hat.copy_with(np.where(mask, data, 0.0))
    residual = v_hat.copy_with(np.where(mask, 0.0, data))
    return refined, residual
