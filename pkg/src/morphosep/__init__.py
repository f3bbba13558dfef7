"""Single-channel blind source separation by spectrogram morphological
filtering, with unsupervised singing-voice detection on top."""

from .audio import AudioSignal
from .kam import (
    KamConfig,
    Kernel,
    binarize_kernel,
    hpss_split,
    kam_separate,
    kernel_cross,
    kernel_harmonic,
    kernel_percussive,
    kernel_repet,
    median_neighborhood,
    train_kernel,
)
from .masking import MaskSet, SeparationResult, oracle_masks, wiener_apply
from .metrics import bss_eval, detection_metrics, rqf, score_separation
from .pipeline import detect_pipeline, separate
from .rpca import PcpResult, RpcaConfig, pcp, rpca_separate, soft_threshold, svt
from .stft import Stft, StftConfig, istft, spectrogram, stft
from .synth import SynthRecipe, synth_mixture
from .tv import TvConfig, tv_masks, tv_separate
from .vad import (
    DetectionLattice,
    VadConfig,
    YinConfig,
    bandpass,
    detect_voice,
    f0_filter,
    frame_truth,
    vtmr,
    yin_f0,
)

__version__ = "0.1.0"

__all__ = [
    "AudioSignal",
    "DetectionLattice",
    "KamConfig",
    "Kernel",
    "MaskSet",
    "PcpResult",
    "RpcaConfig",
    "SeparationResult",
    "Stft",
    "StftConfig",
    "SynthRecipe",
    "TvConfig",
    "VadConfig",
    "YinConfig",
    "bandpass",
    "binarize_kernel",
    "bss_eval",
    "detect_pipeline",
    "detect_voice",
    "detection_metrics",
    "f0_filter",
    "frame_truth",
    "hpss_split",
    "istft",
    "kam_separate",
    "kernel_cross",
    "kernel_harmonic",
    "kernel_percussive",
    "kernel_repet",
    "median_neighborhood",
    "oracle_masks",
    "pcp",
    "rpca_separate",
    "rqf",
    "score_separation",
    "separate",
    "soft_threshold",
    "spectrogram",
    "stft",
    "svt",
    "synth_mixture",
    "train_kernel",
    "tv_masks",
    "tv_separate",
    "vtmr",
    "wiener_apply",
    "yin_f0",
]
