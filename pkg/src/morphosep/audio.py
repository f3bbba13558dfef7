"""Mono audio container shared by every stage of the toolkit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AudioSignal:
    """A mono sample sequence with its sample rate.

    Samples are stored as float64 and are expected to be normalized to
    [-1, 1] at ingestion (see `morphosep.io.load_wav`).
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"expected a mono 1-D sample array, got shape {self.samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return self.samples.size / self.sample_rate

    def energy(self) -> float:
        return float(np.sum(self.samples ** 2))
