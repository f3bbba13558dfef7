import numpy as np
import pytest

from morphosep import AudioSignal, SynthRecipe, synth_mixture


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def short_mix():
    """A 12 s vibrato + drone + clicks mixture shared across tests."""
    return synth_mixture(
        SynthRecipe(components=("vibrato", "drone", "clicks"), duration=12.0, seed=0)
    )


@pytest.fixture(scope="session")
def tone_and_clicks():
    """Equal-energy sustained tone and click train at 22050 Hz, 3 s."""
    fs = 22050
    t = np.arange(3 * fs) / fs
    gen = np.random.default_rng(7)
    tone = np.sin(2 * np.pi * 523.25 * t) + 0.5 * np.sin(2 * np.pi * 1046.5 * t)
    clicks = np.zeros_like(t)
    burst_len = int(0.003 * fs)
    envelope = np.hanning(2 * burst_len)[burst_len:]
    for start in np.arange(0.1, 3.0, 0.25):
        i = int(start * fs)
        if i + burst_len <= clicks.size:
            clicks[i:i + burst_len] += envelope * gen.uniform(-1, 1, burst_len)
    clicks *= np.sqrt(np.sum(tone ** 2) / np.sum(clicks ** 2))
    return AudioSignal(tone, fs), AudioSignal(clicks, fs)
