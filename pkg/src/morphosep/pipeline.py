"""End-to-end orchestration: separation dispatch and voice detection.

``separate`` is the shared scaffold every method runs through: STFT,
method-specific mask estimation, alpha-Wiener filtering, inverse STFT.
``detect_pipeline`` chains a separator with the optional percussive
pre-split and F0 refinement, then band-passes, computes the VTMR lattice
and thresholds it into per-frame voice decisions.
"""

from __future__ import annotations

import numpy as np

from .audio import AudioSignal
from .io import resample
from .kam import (
    KamConfig,
    Kernel,
    estimate_repetition_period,
    hpss_split,
    kam_separate,
    kernel_cross,
    kernel_repet,
)
from .masking import SeparationResult, default_labels, oracle_masks, wiener_apply
from .rpca import RpcaConfig, rpca_separate
from .stft import StftConfig, istft, stft
from .tv import TvConfig, tv_separate
from .vad import VadConfig, YinConfig, bandpass, detect_voice, f0_filter, f0_track, vtmr

METHODS = ("oracle", "tv", "rpca", "kam-repet", "kam-cust")


def separate(
    x: AudioSignal,
    method: str,
    *,
    references: list[AudioSignal] | None = None,
    labels: list[str] | None = None,
    kernels: list[Kernel] | None = None,
    alpha: float = 2.0,
    stft_cfg: StftConfig | None = None,
    tv_cfg: TvConfig | None = None,
    rpca_cfg: RpcaConfig | None = None,
    kam_iter: int = 4,
    kam_update: str = "gauss-seidel",
    hpss: bool = False,
    hpss_size: int = 19,
    repet_period_s: float | None = None,
    repet_count: int = 5,
) -> SeparationResult:
    """Separate a mono mixture with the chosen method.

    ``hpss`` first splits off the percussive part with a kernel-median
    harmonic/percussive stage and runs the main method on the remainder
    (only meaningful for the 2-source methods rpca and kam-repet).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    if stft_cfg is None:
        stft_cfg = StftConfig(sample_rate=x.sample_rate)

    if method == "oracle":
        return _separate_oracle(x, references, labels, alpha, stft_cfg)
    if method == "tv":
        return tv_separate(x, tv_cfg or TvConfig())

    percussive = None
    if hpss and method in ("rpca", "kam-repet"):
        split = hpss_split(x, size=hpss_size, stft_cfg=stft_cfg, alpha=alpha)
        percussive = split.by_label("percussive")
        x = split.by_label("harmonic")

    if method == "rpca":
        result = rpca_separate(x, rpca_cfg or RpcaConfig(), stft_cfg, alpha)
    elif method == "kam-repet":
        result = _separate_kam_repet(
            x, stft_cfg, alpha, kam_iter, kam_update, repet_period_s, repet_count
        )
    else:  # kam-cust
        if not kernels:
            raise ValueError("method 'kam-cust' requires trained kernels")
        cfg = KamConfig(kernels=kernels, alpha=alpha, n_iter=kam_iter, update=kam_update)
        result = kam_separate(stft(x, stft_cfg), cfg)

    if percussive is not None:
        result.labels = ["harmonic" if lab == "other" else lab for lab in result.labels]
        result.signals.append(percussive)
        result.stfts.append(split.stfts[split.labels.index("percussive")])
        result.labels.append("percussive")
    return result


def _separate_oracle(x, references, labels, alpha, stft_cfg) -> SeparationResult:
    if not references or len(references) < 2:
        raise ValueError("method 'oracle' requires at least 2 reference signals")
    if labels is None:
        labels = default_labels(len(references))
    x_stft = stft(x, stft_cfg)
    ref_stfts = [stft(r, stft_cfg) for r in references]
    masks = oracle_masks(ref_stfts, labels=labels, alpha=alpha)
    stfts = wiener_apply(x_stft, masks)
    return SeparationResult(
        signals=[istft(s) for s in stfts],
        stfts=stfts,
        labels=list(labels),
    )


def _separate_kam_repet(
    x, stft_cfg, alpha, n_iter, update, period_s, count
) -> SeparationResult:
    x_stft = stft(x, stft_cfg)
    if period_s is None:
        period = estimate_repetition_period(x_stft)
    else:
        period = max(1, int(round(period_s * stft_cfg.sample_rate / stft_cfg.hop)))
    kernels = [kernel_repet(period, count=count), kernel_cross(5, 15)]
    cfg = KamConfig(kernels=kernels, alpha=alpha, n_iter=n_iter, update=update)
    result = kam_separate(x_stft, cfg)
    result.extras["repet_period_frames"] = period
    return result


def detect_pipeline(
    x: AudioSignal,
    method: str,
    *,
    vad_cfg: VadConfig | None = None,
    yin_cfg: YinConfig | None = None,
    f0_refine: bool = False,
    tv_cfg: TvConfig | None = None,
    **separation_kwargs,
):
    """Run separation then VTMR voice detection; returns the decided lattice.

    The mixture is first resampled to the separation method's operating
    rate so the estimate and the mixture stay sample-aligned. Both are
    band-passed to the vocal range before the energy-ratio computation.
    """
    tv_cfg = tv_cfg or TvConfig()
    rate = tv_cfg.target_rate if method == "tv" else x.sample_rate
    x_op = resample(x, rate)
    result = separate(x_op, method, tv_cfg=tv_cfg, **separation_kwargs)
    v_hat = result.voice

    if f0_refine:
        v_index = result.labels.index("voice")
        v_stft = result.stfts[v_index]
        centers = np.arange(v_stft.n_frames) * v_stft.config.hop
        track = f0_track(v_hat, centers, yin_cfg)
        refined, residual = f0_filter(v_stft, track)
        v_hat = istft(refined)
        if "harmonic" in result.labels:
            h_index = result.labels.index("harmonic")
            rerouted = result.stfts[h_index].copy_with(
                result.stfts[h_index].data + residual.data
            )
            result.stfts[h_index] = rerouted
            result.signals[h_index] = istft(rerouted)
        result.stfts[v_index] = refined
        result.signals[v_index] = v_hat

    if vad_cfg is None:
        vad_cfg = VadConfig.for_rate(rate)
    low, high = vad_cfg.band
    lattice = vtmr(bandpass(x_op, low, high), bandpass(v_hat, low, high), vad_cfg)
    return detect_voice(lattice, vad_cfg.voice_thr)
