"""Parameterized Wiener filtering and the oracle separator.

Every separator in this package produces a set of non-negative masks, one
per source, which are turned into complex source estimates by the
alpha-parameterized Wiener filter

    S_i = M_i**alpha / sum_j M_j**alpha * X.

The fractions sum to one at every bin, so the estimates always add back up
to the mixture STFT.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import AudioSignal
from .stft import Stft

SOURCE_ROLES = ("voice", "harmonic", "percussive", "other")


@dataclass
class MaskSet:
    """Non-negative masks sharing one (F, T) shape, one per source role."""

    masks: list[np.ndarray]
    labels: list[str]
    alpha: float = 2.0

    def __post_init__(self):
        if not self.masks:
            raise ValueError("at least one mask is required")
        if len(self.labels) != len(self.masks):
            raise ValueError(f"{len(self.masks)} masks but {len(self.labels)} labels")
        self.masks = [np.asarray(m, dtype=np.float64) for m in self.masks]
        shape = self.masks[0].shape
        for label, m in zip(self.labels, self.masks):
            if label not in SOURCE_ROLES:
                raise ValueError(f"unknown source role {label!r}, expected one of {SOURCE_ROLES}")
            if m.shape != shape:
                raise ValueError(f"mask shapes differ: {m.shape} vs {shape}")
            if m.size and m.min() < 0:
                raise ValueError(f"mask {label!r} contains negative entries")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def __len__(self) -> int:
        return len(self.masks)

    @property
    def shape(self) -> tuple[int, int]:
        return self.masks[0].shape


@dataclass
class SeparationResult:
    """Time-domain estimates plus their STFTs, in label order."""

    signals: list[AudioSignal]
    stfts: list[Stft]
    labels: list[str]
    extras: dict = field(default_factory=dict)

    def by_label(self, label: str) -> AudioSignal:
        try:
            return self.signals[self.labels.index(label)]
        except ValueError:
            raise KeyError(f"no source labeled {label!r} among {self.labels}") from None

    @property
    def voice(self) -> AudioSignal:
        return self.by_label("voice")


def wiener_fractions(masks: MaskSet) -> np.ndarray:
    """Stacked Wiener fractions, shape (I, F, T); columns sum to one.

    Bins where every mask is zero get a uniform 1/I split so the estimates
    still sum to the mixture there.
    """
    powered = np.stack([m ** masks.alpha for m in masks.masks])
    denom = powered.sum(axis=0)
    zero = denom == 0.0
    fractions = powered / np.where(zero, 1.0, denom)
    if np.any(zero):
        fractions[:, zero] = 1.0 / len(masks)
    return fractions


def wiener_apply(x_stft: Stft, masks: MaskSet) -> list[Stft]:
    """Apply the parameterized Wiener filter; returns one Stft per mask."""
    if masks.shape != x_stft.data.shape:
        raise ValueError(
            f"mask shape {masks.shape} does not match mixture STFT shape {x_stft.data.shape}"
        )
    fractions = wiener_fractions(masks)
    return [x_stft.copy_with(frac * x_stft.data) for frac in fractions]


def oracle_masks(sources: list[Stft], labels: list[str] | None = None, alpha: float = 2.0) -> MaskSet:
    """Build the oracle mask set M_i = |S_i| from the true isolated sources."""
    if len(sources) < 2:
        raise ValueError(f"oracle masking needs at least 2 sources, got {len(sources)}")
    shape = sources[0].data.shape
    for s in sources[1:]:
        if s.data.shape != shape:
            raise ValueError(f"source STFT shapes differ: {s.data.shape} vs {shape}")
    if labels is None:
        labels = default_labels(len(sources))
    return MaskSet(masks=[np.abs(s.data) for s in sources], labels=list(labels), alpha=alpha)


def default_labels(n_sources: int) -> list[str]:
    """Positional role assignment used when the caller does not label sources."""
    if n_sources == 2:
        return ["voice", "other"]
    if n_sources == 3:
        return ["voice", "harmonic", "percussive"]
    return ["voice"] + ["other"] * (n_sources - 1)
