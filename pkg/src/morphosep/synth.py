"""Synthetic test mixtures with known references and voice-activity truth.

Available components:

* ``drone``          steady low harmonic stack (horizontal lines);
* ``partials``       a sustained mid-register chord (more horizontal lines);
* ``vibrato``        frequency-modulated partials gated on/off by the
                     programmed voice segments -- the stand-in "voice";
* ``clicks``         periodic broadband bursts (vertical lines);
* ``chord_loop``     a chord envelope repeating with a fixed period
                     (low-rank / repetitive structure).

The mixture is the sample-exact sum of the rendered references.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .audio import AudioSignal

COMPONENTS = ("drone", "partials", "vibrato", "clicks", "chord_loop")

_ROLES = {
    "drone": "harmonic",
    "partials": "harmonic",
    "vibrato": "voice",
    "clicks": "percussive",
    "chord_loop": "other",
}

DEFAULT_VOICE_SEGMENTS = ((0.2, 0.45), (0.6, 0.9))  # fractions of the duration


@dataclass(frozen=True)
class SynthRecipe:
    components: tuple[str, ...]
    duration: float = 8.0
    sample_rate: int = 22050
    seed: int = 0
    voice_segments: tuple[tuple[float, float], ...] | None = None
    gains: dict = field(default_factory=dict)
    chord_period: float = 1.0
    click_period: float = 0.4

    def __post_init__(self):
        if not self.components:
            raise ValueError("recipe needs at least one component")
        for name in self.components:
            if name not in COMPONENTS:
                raise ValueError(f"unknown component {name!r}, expected one of {COMPONENTS}")
        if self.duration <= 0:
            raise ValueError(f"duration must be positive, got {self.duration}")

    def resolved_voice_segments(self) -> list[tuple[float, float]]:
        if self.voice_segments is not None:
            return [tuple(s) for s in self.voice_segments]
        return [(a * self.duration, b * self.duration) for a, b in DEFAULT_VOICE_SEGMENTS]


@dataclass
class SynthResult:
    mixture: AudioSignal
    references: list[AudioSignal]
    labels: list[str]
    component_names: list[str]
    voice_segments: list[tuple[float, float]]


def _segment_envelope(t: np.ndarray, segments, fade_s: float = 0.01) -> np.ndarray:
    env = np.zeros_like(t)
    for start, end in segments:
        rising = np.clip((t - start) / fade_s, 0.0, 1.0)
        falling = np.clip((end - t) / fade_s, 0.0, 1.0)
        env = np.maximum(env, np.minimum(rising, falling))
    return env


def _harmonic_stack(t, f0, amps, rng, fm=None):
    phase_offsets = rng.uniform(0, 2 * np.pi, size=len(amps))
    base_phase = 2 * np.pi * f0 * t if fm is None else 2 * np.pi * f0 * fm
    out = np.zeros_like(t)
    for k, (amp, phi) in enumerate(zip(amps, phase_offsets), start=1):
        out += amp * np.sin(k * base_phase + phi)
    return out


def _render(name: str, recipe: SynthRecipe, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    fs = recipe.sample_rate
    if name == "drone":
        return 0.22 * _harmonic_stack(t, 110.0, [1.0, 0.7, 0.5, 0.35, 0.25], rng)
    if name == "partials":
        out = np.zeros_like(t)
        for note in (220.0, 277.18, 329.63):
            out += _harmonic_stack(t, note, [1.0, 0.5, 0.3], rng)
        return 0.1 * out
    if name == "vibrato":
        # deep 4.3 Hz vibrato plus a slow wander around 490 Hz, gated by the
        # truth segments: a non-repetitive, frequency-modulated "voice"
        # (incommensurate with the click/chord grids and the drone partials)
        depth = 0.08
        rate = 4.3
        wander = 0.05 * np.sin(2 * np.pi * 0.13 * t + 1.0)
        fm = t + depth / (2 * np.pi * rate) * np.sin(2 * np.pi * rate * t)
        fm = fm + np.cumsum(wander) / fs
        tone = _harmonic_stack(t, 490.0, [1.0, 0.65, 0.45, 0.3], rng, fm=fm)
        return 0.3 * _segment_envelope(t, recipe.resolved_voice_segments()) * tone
    if name == "clicks":
        # one fixed burst shape repeated on a strict grid (periodic structure)
        out = np.zeros_like(t)
        burst_len = int(0.003 * fs)
        burst = np.hanning(2 * burst_len)[burst_len:] * rng.uniform(-1.0, 1.0, size=burst_len)
        for start_s in np.arange(0.05, recipe.duration, recipe.click_period):
            i = int(start_s * fs)
            if i + burst_len > out.size:
                break
            out[i:i + burst_len] += burst
        return 0.5 * out
    if name == "chord_loop":
        period = recipe.chord_period
        env = np.exp(-3.0 * ((t % period) / period))
        out = np.zeros_like(t)
        for note in (196.0, 246.94, 293.66):
            out += _harmonic_stack(t, note, [1.0, 0.5, 0.25], rng)
        return 0.12 * env * out
    raise ValueError(f"unknown component {name!r}")


def synth_mixture(recipe: SynthRecipe) -> SynthResult:
    """Render the recipe's components and their sample-exact sum."""
    fs = recipe.sample_rate
    t = np.arange(int(round(recipe.duration * fs))) / fs
    rng = np.random.default_rng(recipe.seed)

    references = []
    for name in recipe.components:
        gain = recipe.gains.get(name, 1.0)
        references.append(AudioSignal(gain * _render(name, recipe, t, rng), fs))

    mixture = np.zeros_like(t)
    for ref in references:
        mixture = mixture + ref.samples
    segments = recipe.resolved_voice_segments() if "vibrato" in recipe.components else []
    return SynthResult(
        mixture=AudioSignal(mixture, fs),
        references=references,
        labels=[_ROLES[name] for name in recipe.components],
        component_names=list(recipe.components),
        voice_segments=segments,
    )
