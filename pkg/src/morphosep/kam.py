"""Kernel additive modeling: median-filter separation and kernel training.

A source is modeled by a small binary stencil (the kernel) describing which
time-frequency neighbors it resembles: a horizontal row for harmonic
sources, a vertical column for percussive ones, periodic taps for repeating
accompaniment, a cross for smoothly varying vocals. Separation alternates
kernel-median filtering of each estimate's magnitude with alpha-Wiener
re-estimation from the mixture.

Kernels can also be learned from an isolated source: every full patch of
the magnitude spectrogram is normalized (Frobenius) and averaged, weighted
by the power at its center, then binarized with a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from numpy.lib.stride_tricks import sliding_window_view

from .audio import AudioSignal
from .masking import MaskSet, SeparationResult, wiener_apply, wiener_fractions
from .stft import Stft, StftConfig, istft, stft

UPDATE_ORDERS = ("gauss-seidel", "jacobi")


@dataclass
class Kernel:
    """An h x w neighborhood stencil with odd dimensions, centered."""

    values: np.ndarray
    label: str = "other"

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        h, w = self.values.shape
        if h % 2 == 0 or w % 2 == 0:
            raise ValueError(f"kernel dimensions must be odd, got {h}x{w}")
        if self.is_binary and not self.values.any():
            raise ValueError("a binary kernel must contain at least one 1")

    @property
    def h(self) -> int:
        return self.values.shape[0]

    @property
    def w(self) -> int:
        return self.values.shape[1]

    @property
    def is_binary(self) -> bool:
        return bool(np.isin(self.values, (0.0, 1.0)).all())

    def offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """(row, col) offsets of the active taps relative to the center."""
        rows, cols = np.nonzero(self.values)
        return rows - (self.h - 1) // 2, cols - (self.w - 1) // 2


def kernel_harmonic(w: int, label: str = "harmonic") -> Kernel:
    """1 x w horizontal row of ones (stable partials)."""
    return Kernel(np.ones((1, w)), label)


def kernel_percussive(h: int, label: str = "percussive") -> Kernel:
    """h x 1 vertical column of ones (broadband transients)."""
    return Kernel(np.ones((h, 1)), label)


def kernel_repet(period: int, count: int = 5, label: str = "other") -> Kernel:
    """Row kernel with ones every ``period`` frames, ``count`` taps wide."""
    if period < 1:
        raise ValueError(f"period must be at least 1 frame, got {period}")
    if count < 2:
        raise ValueError(f"count must be at least 2, got {count}")
    width = period * (count - 1) + 1
    if width % 2 == 0:
        raise ValueError(f"period*(count-1) must be even for a centered kernel, got width {width}")
    values = np.zeros((1, width))
    values[0, ::period] = 1.0
    return Kernel(values, label)


def kernel_cross(h: int, w: int, label: str = "voice") -> Kernel:
    """Union of the center row and center column (smoothly varying sources)."""
    values = np.zeros((h, w))
    values[(h - 1) // 2, :] = 1.0
    values[:, (w - 1) // 2] = 1.0
    return Kernel(values, label)


@dataclass
class KamConfig:
    kernels: list[Kernel]
    alpha: float = 2.0
    n_iter: int = 4
    update: str = "gauss-seidel"

    def __post_init__(self):
        if len(self.kernels) < 2:
            raise ValueError(f"need at least 2 kernels, got {len(self.kernels)}")
        for k in self.kernels:
            if not k.is_binary:
                raise ValueError(f"separation kernels must be binary ({k.label!r} is not)")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.n_iter < 1:
            raise ValueError(f"n_iter must be at least 1, got {self.n_iter}")
        if self.update not in UPDATE_ORDERS:
            raise ValueError(f"update must be one of {UPDATE_ORDERS}, got {self.update!r}")


def median_neighborhood(m: np.ndarray, kernel: Kernel, row: int, col: int) -> float:
    """Median of |m| over the kernel's active taps centered at (row, col).

    Taps falling outside the matrix are skipped (the population shrinks at
    the edges); an empty population yields 0.
    """
    if not kernel.is_binary:
        raise ValueError("median_neighborhood needs a binary kernel")
    m = np.asarray(m)
    off_r, off_c = kernel.offsets()
    rr = row + off_r
    cc = col + off_c
    keep = (rr >= 0) & (rr < m.shape[0]) & (cc >= 0) & (cc < m.shape[1])
    if not keep.any():
        return 0.0
    return float(np.median(np.abs(m[rr[keep], cc[keep]])))


@njit(cache=True)
def _median_filter(mag, off_r, off_c):
    # full-matrix kernel median with edge shrinking; even counts average
    # the two middle values (same convention as np.median)
    n_freq, n_frames = mag.shape
    out = np.empty((n_freq, n_frames))
    buf = np.empty(off_r.size)
    for t in range(n_frames):
        for f in range(n_freq):
            cnt = 0
            for k in range(off_r.size):
                rr = f + off_r[k]
                cc = t + off_c[k]
                if 0 <= rr < n_freq and 0 <= cc < n_frames:
                    v = mag[rr, cc]
                    j = cnt
                    while j > 0 and buf[j - 1] > v:
                        buf[j] = buf[j - 1]
                        j -= 1
                    buf[j] = v
                    cnt += 1
            if cnt == 0:
                out[f, t] = 0.0
            elif cnt % 2 == 1:
                out[f, t] = buf[cnt // 2]
            else:
                out[f, t] = 0.5 * (buf[cnt // 2 - 1] + buf[cnt // 2])
    return out


@njit(cache=True)
def _gs_iteration(est, x, off_r, off_c, starts, alpha):
    # One in-place sweep: at each point (frame-major order) compute every
    # source's kernel median from the current estimates, then re-split X
    # by the alpha-Wiener fractions at that point.
    n_src, n_freq, n_frames = est.shape
    max_taps = 0
    for i in range(n_src):
        taps = starts[i + 1] - starts[i]
        if taps > max_taps:
            max_taps = taps
    buf = np.empty(max_taps)
    med = np.empty(n_src)
    for t in range(n_frames):
        for f in range(n_freq):
            for i in range(n_src):
                cnt = 0
                for k in range(starts[i], starts[i + 1]):
                    rr = f + off_r[k]
                    cc = t + off_c[k]
                    if 0 <= rr < n_freq and 0 <= cc < n_frames:
                        v = abs(est[i, rr, cc])
                        j = cnt
                        while j > 0 and buf[j - 1] > v:
                            buf[j] = buf[j - 1]
                            j -= 1
                        buf[j] = v
                        cnt += 1
                if cnt == 0:
                    med[i] = 0.0
                elif cnt % 2 == 1:
                    med[i] = buf[cnt // 2]
                else:
                    med[i] = 0.5 * (buf[cnt // 2 - 1] + buf[cnt // 2])
            denom = 0.0
            for i in range(n_src):
                med[i] = med[i] ** alpha
                denom += med[i]
            if denom > 0.0:
                for i in range(n_src):
                    est[i, f, t] = (med[i] / denom) * x[f, t]
            else:
                for i in range(n_src):
                    est[i, f, t] = x[f, t] / n_src


def _packed_offsets(kernels: list[Kernel]):
    off_r, off_c, starts = [], [], [0]
    for k in kernels:
        r, c = k.offsets()
        off_r.append(r)
        off_c.append(c)
        starts.append(starts[-1] + r.size)
    return (
        np.concatenate(off_r).astype(np.int64),
        np.concatenate(off_c).astype(np.int64),
        np.asarray(starts, dtype=np.int64),
    )


def kam_separate(x_stft: Stft, cfg: KamConfig) -> SeparationResult:
    """Iterative kernel-median separation of a mixture STFT.

    Estimates start at X/I; each iteration median-filters every estimate's
    magnitude with its kernel and re-splits X by the alpha-Wiener fractions.
    The default update revisits points in place (later points in a sweep see
    already-updated neighbors); ``update="jacobi"`` filters full matrices
    from the previous iteration's snapshot instead.
    """
    n_src = len(cfg.kernels)
    x = x_stft.data
    est = np.tile(x / n_src, (n_src, 1, 1))
    off_r, off_c, starts = _packed_offsets(cfg.kernels)

    for _ in range(cfg.n_iter):
        if cfg.update == "gauss-seidel":
            _gs_iteration(est, x, off_r, off_c, starts, float(cfg.alpha))
        else:
            masks = MaskSet(
                masks=[
                    _median_filter(np.abs(est[i]), *_packed_offsets([k])[:2])
                    for i, k in enumerate(cfg.kernels)
                ],
                labels=[k.label for k in cfg.kernels],
                alpha=cfg.alpha,
            )
            est = wiener_fractions(masks) * x

    labels = [k.label for k in cfg.kernels]
    stfts = [x_stft.copy_with(est[i]) for i in range(n_src)]
    return SeparationResult(
        signals=[istft(s) for s in stfts],
        stfts=stfts,
        labels=labels,
    )


def hpss_split(
    x: AudioSignal,
    size: int = 19,
    stft_cfg: StftConfig | None = None,
    alpha: float = 2.0,
    n_iter: int = 4,
) -> SeparationResult:
    """Harmonic/percussive split with a 1 x size row and size x 1 column kernel."""
    if stft_cfg is None:
        stft_cfg = StftConfig(sample_rate=x.sample_rate)
    cfg = KamConfig(
        kernels=[kernel_harmonic(size), kernel_percussive(size)],
        alpha=alpha,
        n_iter=n_iter,
    )
    return kam_separate(stft(x, stft_cfg), cfg)


def train_kernel(source: Stft | np.ndarray, h: int, w: int, label: str = "other") -> Kernel:
    """Learn a real-valued kernel from an isolated source spectrogram.

    Every full h x w magnitude patch is normalized by its Frobenius norm and
    averaged, weighted by the squared magnitude at the patch center. Patch
    centers too close to the border (no full patch) are skipped.
    """
    if h % 2 == 0 or w % 2 == 0:
        raise ValueError(f"kernel dimensions must be odd, got {h}x{w}")
    mag = np.abs(source.data if isinstance(source, Stft) else np.asarray(source))
    n_freq, n_frames = mag.shape
    if n_freq < h or n_frames < w:
        raise ValueError(
            f"spectrogram ({n_freq}x{n_frames}) smaller than the kernel ({h}x{w})"
        )

    windows = sliding_window_view(mag, (h, w))
    norms = np.sqrt(np.einsum("ijkl,ijkl->ij", windows, windows))
    half_h, half_w = (h - 1) // 2, (w - 1) // 2
    power = mag[half_h:n_freq - half_h, half_w:n_frames - half_w] ** 2
    total = power.sum()
    if total == 0.0:
        raise ValueError("cannot train a kernel from an all-zero source")

    weights = np.divide(power, norms, out=np.zeros_like(power), where=norms > 0)
    values = np.einsum("ij,ijkl->kl", weights, windows) / total
    return Kernel(values, label)


def binarize_kernel(kernel: Kernel, gamma_thr: float) -> Kernel:
    """Threshold a trained kernel into a binary one (strict '>')."""
    values = (kernel.values > gamma_thr).astype(np.float64)
    if not values.any():
        raise ValueError(
            f"threshold {gamma_thr} leaves no active tap; lower it "
            f"(kernel max is {kernel.values.max():.4g})"
        )
    return Kernel(values, kernel.label)


def estimate_repetition_period(
    x_stft: Stft,
    min_period_s: float = 0.2,
    max_period_s: float = 8.0,
) -> int:
    """Estimate a repetition period (in frames) from the beat spectrum.

    Candidate lags are scored by the mean energy autocorrelation over their
    integer multiples, so the fundamental grid beats both its own harmonics
    and locally periodic foreground modulation.
    """
    power = np.abs(x_stft.data) ** 2
    novelty = np.maximum(np.diff(power, axis=1), 0.0).sum(axis=0)
    novelty = novelty - novelty.mean()
    n = novelty.size
    acorr = np.correlate(novelty, novelty, mode="full")[n - 1:]
    if acorr[0] > 0:
        acorr = acorr / acorr[0]
    frame_rate = x_stft.config.sample_rate / x_stft.config.hop
    lo = max(1, int(round(min_period_s * frame_rate)))
    hi = min(n // 3, int(round(max_period_s * frame_rate)))
    if hi <= lo:
        raise ValueError("signal too short to estimate a repetition period")

    # mean autocorrelation over each lag's multiples; sub-harmonics tie with
    # the fundamental, so take the smallest lag within tolerance of the best
    scores = np.array([acorr[lag: n // 2 + 1: lag].mean() for lag in range(lo, hi + 1)])
    floor = acorr[lo:hi + 1].min()
    good = scores >= floor + 0.9 * (scores.max() - floor)
    return lo + int(np.argmax(good))
