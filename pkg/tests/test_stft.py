import numpy as np
import pytest

from morphosep import AudioSignal, StftConfig, istft, spectrogram, stft


def test_zero_signal_gives_zero_stft():
    x = AudioSignal(np.zeros(22050), 22050)
    assert not np.any(stft(x).data)


def test_round_trip_random_noise(rng):
    x = AudioSignal(rng.standard_normal(2 * 22050), 22050)
    y = istft(stft(x, StftConfig(2048, 512)))
    assert len(y) == len(x)
    assert np.linalg.norm(y.samples - x.samples) / np.linalg.norm(x.samples) < 1e-10


def test_round_trip_tone_max_error():
    fs = 22050
    t = np.arange(2 * fs) / fs
    x = AudioSignal(np.sin(2 * np.pi * 440 * t), fs)
    y = istft(stft(x))
    assert np.max(np.abs(y.samples - x.samples)) < 1e-9


def test_round_trip_64ms_three_quarter_overlap(rng):
    cfg = StftConfig.from_ms(16000, 64.0, 0.75)
    assert (cfg.window_length, cfg.hop) == (1024, 256)
    x = AudioSignal(rng.standard_normal(16000), 16000)
    y = istft(stft(x, cfg))
    assert np.linalg.norm(y.samples - x.samples) / np.linalg.norm(x.samples) < 1e-10


def test_bin_centered_sinusoid_energy_concentration():
    # oracle: the DFT of the Hann-windowed sinusoid computed directly
    cfg = StftConfig(2048, 512, sample_rate=22050)
    k = 100
    freq = k * cfg.sample_rate / cfg.window_length
    t = np.arange(22050) / cfg.sample_rate
    x = AudioSignal(np.sin(2 * np.pi * freq * t), cfg.sample_rate)
    s = stft(x, cfg)

    pad = cfg.window_length // 2
    padded = np.concatenate([np.zeros(pad), x.samples, np.zeros(cfg.window_length)])
    frame_idx = s.n_frames // 2
    segment = padded[frame_idx * cfg.hop:frame_idx * cfg.hop + cfg.window_length]
    oracle = np.fft.rfft(segment * cfg.window_array())
    assert np.allclose(s.data[:, frame_idx], oracle, atol=1e-10)

    interior = range(4, s.n_frames - 4)
    power = np.abs(s.data) ** 2
    for n in interior:
        total = power[:, n].sum()
        assert power[k - 1:k + 2, n].sum() >= 0.95 * total


def test_linearity(rng):
    fs = 22050
    x1 = AudioSignal(rng.standard_normal(30000), fs)
    x2 = AudioSignal(rng.standard_normal(30000), fs)
    a, b = 0.7, -1.3
    mix = AudioSignal(a * x1.samples + b * x2.samples, fs)
    lhs = stft(mix).data
    rhs = a * stft(x1).data + b * stft(x2).data
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_windowed_energy_constant(rng):
    # interior-supported signals: summed windowed energy is a fixed multiple
    # of the signal energy (3/2 for the periodic Hann at 3/4 overlap)
    cfg = StftConfig(2048, 512, sample_rate=22050)
    ratios = []
    for _ in range(10):
        samples = np.zeros(44100)
        samples[4096:-4096] = rng.standard_normal(44100 - 8192)
        s = stft(AudioSignal(samples, 22050), cfg)
        power = np.abs(s.data) ** 2
        one_sided = power[0] + 2 * power[1:-1].sum(axis=0) + power[-1]
        ratios.append(one_sided.sum() / cfg.window_length / np.sum(samples ** 2))
    assert np.ptp(ratios) < 1e-6
    assert abs(np.mean(ratios) - 1.5) < 1e-9


def test_istft_of_modified_stft_is_finite(rng):
    x = AudioSignal(rng.standard_normal(22050), 22050)
    s = stft(x)
    s.data[100, :] = 0.0
    y = istft(s)
    assert np.all(np.isfinite(y.samples))


def test_zero_stft_inverts_to_zero():
    cfg = StftConfig()
    s_zero = stft(AudioSignal(np.zeros(10000), 22050), cfg)
    assert not np.any(istft(s_zero).samples)


def test_empty_signal_rejected():
    with pytest.raises(ValueError):
        stft(AudioSignal(np.zeros(0), 22050))


def test_invalid_configs_rejected():
    with pytest.raises(ValueError):
        StftConfig(window_length=2048, hop=4096)
    with pytest.raises(ValueError):
        StftConfig(window_length=0)
    with pytest.raises(ValueError):
        StftConfig(hop=0)
    with pytest.raises(ValueError):
        StftConfig(window="hamming")


def test_inconsistent_bins_rejected():
    from morphosep import Stft

    with pytest.raises(ValueError):
        Stft(data=np.zeros((100, 10), dtype=complex), config=StftConfig(), original_length=5000)


def test_spectrogram_values():
    from morphosep import Stft

    data = np.array([[3 + 4j, 0.0], [0.0, 1j]])
    cfg = StftConfig(window_length=2, hop=1)
    s = Stft(data=data, config=cfg, original_length=4)
    assert spectrogram(s, 1.0)[0, 0] == pytest.approx(25.0)
    assert spectrogram(s, 0.25)[0, 0] == pytest.approx(25.0 ** 0.25)
    zero = Stft(data=np.zeros((2, 3), dtype=complex), config=cfg, original_length=4)
    assert not np.any(spectrogram(zero, 0.7))
    with pytest.raises(ValueError):
        spectrogram(s, 0.0)
